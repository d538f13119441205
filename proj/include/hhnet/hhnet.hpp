#pragma once

#include "analysis.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "hh.hpp"
#include "io.hpp"
#include "plasticity.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "synapse.hpp"
#include "topology.hpp"
#include "version.hpp"
#include "cli.hpp"
