#pragma once

#include "detshallow/abs_det.hpp"
#include "detshallow/bounds.hpp"
#include "detshallow/cac.hpp"
#include "detshallow/circuit.hpp"
#include "detshallow/coeff_extract.hpp"
#include "detshallow/depth_reduce.hpp"
#include "detshallow/det_circuits.hpp"
#include "detshallow/errors.hpp"
#include "detshallow/log_transform.hpp"
#include "detshallow/matrix.hpp"
#include "detshallow/numeric.hpp"
#include "detshallow/pipeline.hpp"
#include "detshallow/precision.hpp"
#include "detshallow/report.hpp"
#include "detshallow/roots.hpp"
