#pragma once

#include "nvunmix/basis_fit.hpp"
#include "nvunmix/decomposition.hpp"
#include "nvunmix/errors.hpp"
#include "nvunmix/filter.hpp"
#include "nvunmix/io.hpp"
#include "nvunmix/map_unmix.hpp"
#include "nvunmix/render.hpp"
#include "nvunmix/report.hpp"
#include "nvunmix/spectrum.hpp"
#include "nvunmix/synth.hpp"
