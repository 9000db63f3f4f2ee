#pragma once

#include "uds/dataset.hpp"
#include "uds/discretizer.hpp"
#include "uds/entropy.hpp"
#include "uds/harness.hpp"
#include "uds/scoring.hpp"
#include "uds/search.hpp"
