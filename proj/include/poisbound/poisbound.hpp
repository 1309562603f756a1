#pragma once

// Umbrella header.

#include "poisbound/coupling.hpp"
#include "poisbound/experiment.hpp"
#include "poisbound/geom.hpp"
#include "poisbound/interpoint.hpp"
#include "poisbound/parallel.hpp"
#include "poisbound/pmf.hpp"
#include "poisbound/pointproc.hpp"
#include "poisbound/poisson.hpp"
#include "poisbound/rng.hpp"
#include "poisbound/runs.hpp"
#include "poisbound/special.hpp"
#include "poisbound/stein.hpp"
#include "poisbound/ustat.hpp"
#include "poisbound/voronoi.hpp"
