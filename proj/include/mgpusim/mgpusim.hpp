#pragma once

#include "mgpusim/cache.hpp"
#include "mgpusim/config.hpp"
#include "mgpusim/dram.hpp"
#include "mgpusim/engine.hpp"
#include "mgpusim/error.hpp"
#include "mgpusim/event_queue.hpp"
#include "mgpusim/interconnect.hpp"
#include "mgpusim/paging.hpp"
#include "mgpusim/report.hpp"
#include "mgpusim/sim_time.hpp"
#include "mgpusim/stats.hpp"
#include "mgpusim/topology.hpp"
#include "mgpusim/workload_spec.hpp"
#include "mgpusim/workloads.hpp"
