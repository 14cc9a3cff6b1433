#ifndef CONDET_CONDET_HPP
#define CONDET_CONDET_HPP

#include "condet/corpus.hpp"
#include "condet/eval.hpp"
#include "condet/features.hpp"
#include "condet/gbdt.hpp"
#include "condet/model_io.hpp"
#include "condet/tuning.hpp"

#endif  // CONDET_CONDET_HPP
