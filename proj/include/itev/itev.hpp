#pragma once

#include "itev/errors.hpp"
#include "itev/types.hpp"
#include "itev/contrast.hpp"
#include "itev/grid.hpp"
#include "itev/pencil.hpp"
#include "itev/resolvent.hpp"
#include "itev/estimates.hpp"
#include "itev/spectral.hpp"
#include "itev/perturbation.hpp"
#include "itev/oracle.hpp"
#include "itev/io.hpp"
#include "itev/config.hpp"
