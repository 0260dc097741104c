#pragma once

#include "cocoaug/balance.hpp"
#include "cocoaug/coco_io.hpp"
#include "cocoaug/error.hpp"
#include "cocoaug/geometry.hpp"
#include "cocoaug/image_io.hpp"
#include "cocoaug/parallel.hpp"
#include "cocoaug/pipeline.hpp"
#include "cocoaug/pixel_aug.hpp"
#include "cocoaug/postprocess.hpp"
#include "cocoaug/random.hpp"
#include "cocoaug/spatial_aug.hpp"
