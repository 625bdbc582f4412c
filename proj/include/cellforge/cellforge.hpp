#pragma once

#include "cellforge/bench.hpp"
#include "cellforge/cells.hpp"
#include "cellforge/device.hpp"
#include "cellforge/error.hpp"
#include "cellforge/measure.hpp"
#include "cellforge/netlist.hpp"
#include "cellforge/random_netlist.hpp"
#include "cellforge/sizing.hpp"
#include "cellforge/switchlevel.hpp"
#include "cellforge/transient.hpp"
#include "cellforge/units.hpp"
#include "cellforge/waveform_io.hpp"
