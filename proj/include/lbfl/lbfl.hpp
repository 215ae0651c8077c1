#pragma once

// Umbrella header for the LBFL solver toolkit.

#include "lbfl/core.hpp"
#include "lbfl/flow.hpp"
#include "lbfl/local_search.hpp"
#include "lbfl/bicriteria.hpp"
#include "lbfl/reduction.hpp"
#include "lbfl/oracle.hpp"
#include "lbfl/pipeline.hpp"
#include "lbfl/gallery.hpp"
