#pragma once

#include "csoac/rng.hpp"
#include "csoac/parallel.hpp"
#include "csoac/cs_core.hpp"
#include "csoac/waveform.hpp"
#include "csoac/channel.hpp"
#include "csoac/detect.hpp"
#include "csoac/link.hpp"
#include "csoac/analysis.hpp"
#include "csoac/montecarlo.hpp"
#include "csoac/control.hpp"
