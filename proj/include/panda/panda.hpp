#pragma once

#include "panda/assembly.hpp"
#include "panda/bitvector.hpp"
#include "panda/error.hpp"
#include "panda/fabric.hpp"
#include "panda/graph.hpp"
#include "panda/isa.hpp"
#include "panda/mapping.hpp"
#include "panda/perf.hpp"
#include "panda/sequence.hpp"
#include "panda/trace.hpp"
#include "panda/truthtable.hpp"
#include "panda/workload.hpp"
