// odtmotion: rigid-motion estimation for optical diffraction tomography
// Umbrella header pulling in the whole library.
#pragma once

#include <odt/arcs.hpp>
#include <odt/detect.hpp>
#include <odt/direct.hpp>
#include <odt/energy.hpp>
#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/geometry.hpp>
#include <odt/grid.hpp>
#include <odt/infinitesimal.hpp>
#include <odt/io.hpp>
#include <odt/nelder_mead.hpp>
#include <odt/phantom.hpp>
#include <odt/scenario.hpp>
#include <odt/so3.hpp>
#include <odt/spline.hpp>
#include <odt/stereo.hpp>
#include <odt/trajectory.hpp>
#include <odt/translation.hpp>
#include <odt/types.hpp>
