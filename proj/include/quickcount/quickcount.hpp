#ifndef QUICKCOUNT_QUICKCOUNT_HPP
#define QUICKCOUNT_QUICKCOUNT_HPP

#include "quickcount/baseline.hpp"
#include "quickcount/calibration.hpp"
#include "quickcount/common.hpp"
#include "quickcount/copula.hpp"
#include "quickcount/dependence.hpp"
#include "quickcount/frame.hpp"
#include "quickcount/harness.hpp"
#include "quickcount/mathfn.hpp"
#include "quickcount/posterior.hpp"
#include "quickcount/report.hpp"
#include "quickcount/rng.hpp"
#include "quickcount/sampling.hpp"

#endif
