#pragma once

#include "fbe/channel.hpp"
#include "fbe/dsp.hpp"
#include "fbe/error.hpp"
#include "fbe/estimator.hpp"
#include "fbe/harness.hpp"
#include "fbe/io.hpp"
#include "fbe/training.hpp"
