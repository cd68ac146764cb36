#pragma once

#include "piafit/points.hpp"
#include "piafit/splines.hpp"

namespace piafit {

/// Normalized accumulated chord length: t_1 = 0, t_m = 1 and
/// t_{j+1} - t_j proportional to |Q_{j+1} - Q_j|. A repeated consecutive
/// point throws DegenerateInputError.
ParameterList chord_params(const PointSet& data);

/// Parameters of a rows × cols data grid: u (length rows) averages the chord
/// parameters of every column curve Q(., j); v (length cols) averages those
/// of every row curve Q(i, .).
struct SurfaceParams {
    ParameterList u;
    ParameterList v;
};

SurfaceParams grid_params(const PointGrid& data);

}  // namespace piafit
