#pragma once

// Umbrella header.

#include "kge/matrix.hpp"
#include "kge/probmath.hpp"
#include "kge/semnet.hpp"
#include "kge/genmodel.hpp"
#include "kge/inference.hpp"
#include "kge/environment.hpp"
#include "kge/knowledge.hpp"
