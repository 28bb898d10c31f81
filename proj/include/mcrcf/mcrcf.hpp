#pragma once

// Umbrella header.
#include "mcrcf/common.hpp"
#include "mcrcf/ratings.hpp"
#include "mcrcf/encoder.hpp"
#include "mcrcf/scorers.hpp"
#include "mcrcf/index.hpp"
#include "mcrcf/neighbors.hpp"
#include "mcrcf/knn.hpp"
#include "mcrcf/baselines.hpp"
#include "mcrcf/predictor.hpp"
#include "mcrcf/eval.hpp"
