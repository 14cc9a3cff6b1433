#ifndef CONDET_UNICODE_HPP
#define CONDET_UNICODE_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace condet::unicode {

// Minimal UTF-8 handling for the feature extractor: first-codepoint
// capitalization, codepoint counting, and case folding for vocabulary
// lookups. Covers Basic Latin, Latin-1 Supplement, Latin Extended-A,
// Greek, and Cyrillic, which is sufficient for the corpora this tool
// targets. Malformed bytes are treated as one codepoint each.

inline std::size_t decode(std::string_view s, std::size_t pos, char32_t& out) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        out = b0;  // stray continuation byte
        return 1;
    }
    if (pos + len > s.size()) {
        out = b0;
        return 1;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            out = b0;
            return 1;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    out = cp;
    return len;
}

inline std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0;
    char32_t cp;
    for (std::size_t i = 0; i < s.size(); i += decode(s, i, cp)) ++n;
    return n;
}

inline bool is_upper(char32_t c) {
    if (c < 0x80) return c >= U'A' && c <= U'Z';
    if (c >= 0x00C0 && c <= 0x00DE) return c != 0x00D7;
    if (c >= 0x0100 && c <= 0x0137) return c % 2 == 0;
    if (c >= 0x0139 && c <= 0x0148) return c % 2 == 1;
    if (c >= 0x014A && c <= 0x0177) return c % 2 == 0;
    if (c == 0x0178 || c == 0x0179 || c == 0x017B || c == 0x017D) return true;
    if (c >= 0x0386 && c <= 0x038F) return c != 0x0387;
    if (c >= 0x0391 && c <= 0x03AB) return c != 0x03A2;
    if (c >= 0x0400 && c <= 0x042F) return true;
    return false;
}

inline char32_t to_lower(char32_t c) {
    if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 32 : c;
    if (c == 0x0130) return U'i';  // dotted capital I folds to plain i
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
    if (c >= 0x0100 && c <= 0x0137) return c % 2 == 0 ? c + 1 : c;
    if (c >= 0x0139 && c <= 0x0148) return c % 2 == 1 ? c + 1 : c;
    if (c >= 0x014A && c <= 0x0177) return c % 2 == 0 ? c + 1 : c;
    if (c == 0x0178) return 0x00FF;
    if (c == 0x0179 || c == 0x017B || c == 0x017D) return c + 1;
    if (c >= 0x0386 && c <= 0x03AB && unicode::is_upper(c)) {
        if (c == 0x0386) return 0x03AC;
        if (c >= 0x0388 && c <= 0x038A) return c + 0x25;
        if (c == 0x038C) return 0x03CC;
        if (c == 0x038E || c == 0x038F) return c + 0x3F;
        return c + 32;
    }
    if (c >= 0x0400 && c <= 0x040F) return c + 80;
    if (c >= 0x0410 && c <= 0x042F) return c + 32;
    return c;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp;
        i += decode(s, i, cp);
        append_utf8(out, to_lower(cp));
    }
    return out;
}

inline bool first_char_upper(std::string_view s) {
    if (s.empty()) return false;
    char32_t cp;
    decode(s, 0, cp);
    return is_upper(cp);
}

}  // namespace condet::unicode

#endif  // CONDET_UNICODE_HPP
