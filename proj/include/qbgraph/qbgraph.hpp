#pragma once

#include "qbgraph/config.hpp"
#include "qbgraph/dynamics.hpp"
#include "qbgraph/ensembles.hpp"
#include "qbgraph/enumerate.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/experiments.hpp"
#include "qbgraph/graph.hpp"
#include "qbgraph/parallel.hpp"
#include "qbgraph/rng.hpp"
#include "qbgraph/spectral.hpp"
#include "qbgraph/stats.hpp"
#include "qbgraph/table.hpp"
#include "qbgraph/text.hpp"
