#ifndef CMO_CMO_HPP
#define CMO_CMO_HPP

#include "cmo/core.hpp"
#include "cmo/engine.hpp"
#include "cmo/metrics.hpp"
#include "cmo/problems.hpp"
#include "cmo/rng.hpp"
#include "cmo/schedule.hpp"
#include "cmo/selection.hpp"
#include "cmo/staging.hpp"
#include "cmo/stats.hpp"
#include "cmo/variation.hpp"

#endif
