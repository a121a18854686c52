#pragma once

#include "swfe/analysis.hpp"
#include "swfe/assembly.hpp"
#include "swfe/config.hpp"
#include "swfe/elements.hpp"
#include "swfe/io.hpp"
#include "swfe/mesh.hpp"
#include "swfe/model.hpp"
#include "swfe/spaces.hpp"
