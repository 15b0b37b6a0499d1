#pragma once

// Umbrella header for the wave-scattering relaxation library.

#include "wavepmp/async.hpp"
#include "wavepmp/boundaries.hpp"
#include "wavepmp/checkpoint.hpp"
#include "wavepmp/common.hpp"
#include "wavepmp/config.hpp"
#include "wavepmp/control.hpp"
#include "wavepmp/energy.hpp"
#include "wavepmp/gradcheck.hpp"
#include "wavepmp/grid.hpp"
#include "wavepmp/impedance.hpp"
#include "wavepmp/metric.hpp"
#include "wavepmp/metrics.hpp"
#include "wavepmp/models.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/pmp.hpp"
#include "wavepmp/run_setup.hpp"
#include "wavepmp/trainer.hpp"
#include "wavepmp/transport.hpp"
#include "wavepmp/verify.hpp"
#include "wavepmp/waves.hpp"
