#pragma once

#include "mueit/admissible.hpp"
#include "mueit/errors.hpp"
#include "mueit/frequency.hpp"
#include "mueit/initguess.hpp"
#include "mueit/landweber.hpp"
#include "mueit/mesh.hpp"
#include "mueit/norms.hpp"
#include "mueit/objective.hpp"
#include "mueit/parallel.hpp"
#include "mueit/pde.hpp"
#include "mueit/properbc.hpp"
