#pragma once

#include "jpegcs/cs_core.hpp"
#include "jpegcs/errors.hpp"
#include "jpegcs/full_dct.hpp"
#include "jpegcs/harness.hpp"
#include "jpegcs/image.hpp"
#include "jpegcs/imageio.hpp"
#include "jpegcs/jpeg_core.hpp"
#include "jpegcs/metrics.hpp"
#include "jpegcs/tv.hpp"
