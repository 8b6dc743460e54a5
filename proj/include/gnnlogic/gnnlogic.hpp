#pragma once

#include "gnnlogic/error.hpp"
#include "gnnlogic/graph.hpp"
#include "gnnlogic/float_system.hpp"
#include "gnnlogic/formula.hpp"
#include "gnnlogic/types.hpp"
#include "gnnlogic/gmsc.hpp"
#include "gnnlogic/automata.hpp"
#include "gnnlogic/gnn.hpp"
#include "gnnlogic/acceptance.hpp"
#include "gnnlogic/harness.hpp"

namespace gnnlogic {
inline constexpr const char* kVersion = "1.0.0";
}
