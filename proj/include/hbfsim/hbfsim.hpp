// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "hbfsim/allocation.hpp"
#include "hbfsim/beamsweep.hpp"
#include "hbfsim/channel.hpp"
#include "hbfsim/codebook.hpp"
#include "hbfsim/common.hpp"
#include "hbfsim/config.hpp"
#include "hbfsim/csi.hpp"
#include "hbfsim/metrics.hpp"
#include "hbfsim/network.hpp"
#include "hbfsim/precoder.hpp"
#include "hbfsim/runner.hpp"
#include "hbfsim/scenario.hpp"
#include "hbfsim/steering.hpp"
#include "hbfsim/trace.hpp"
