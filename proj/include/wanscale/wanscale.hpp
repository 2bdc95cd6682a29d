#pragma once

#include "wanscale/rational.hpp"
#include "wanscale/errors.hpp"
#include "wanscale/domain.hpp"
#include "wanscale/latency.hpp"
#include "wanscale/cloudsim.hpp"
#include "wanscale/policy.hpp"
#include "wanscale/underlay.hpp"
#include "wanscale/pipeline.hpp"
#include "wanscale/scenario.hpp"
#include "wanscale/simulation.hpp"
#include "wanscale/analysis.hpp"
#include "wanscale/report.hpp"
