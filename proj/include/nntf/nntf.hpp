#pragma once

// Umbrella header for the nonnegative tensor factorization toolkit.

#include "nntf/io.hpp"
#include "nntf/metrics.hpp"
#include "nntf/models.hpp"
#include "nntf/multirank.hpp"
#include "nntf/ncpd.hpp"
#include "nntf/nmf.hpp"
#include "nntf/ntd.hpp"
#include "nntf/pipeline.hpp"
#include "nntf/rng.hpp"
#include "nntf/synth.hpp"
#include "nntf/tensor.hpp"
