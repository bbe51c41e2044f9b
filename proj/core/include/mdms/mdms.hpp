#pragma once

#include "mdms/engine.hpp"
#include "mdms/errors.hpp"
#include "mdms/lb_distance.hpp"
#include "mdms/motifs.hpp"
#include "mdms/preprocess.hpp"
#include "mdms/series.hpp"
