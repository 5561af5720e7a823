#pragma once

// Orientation and in-sphere predicates for d in {2, 3}. Evaluated in double
// precision with a conservative error filter; uncertain signs are recomputed
// exactly in rational arithmetic, so the returned sign is always exact.

#include <span>

namespace rubbernet::predicates {

/// Sign of det[p_1 - p_0, ..., p_d - p_0]; pts holds d+1 pointers to d coordinates.
int orient(int dim, std::span<const double* const> pts);

/// +1 if q lies strictly inside the circumsphere of the simplex pts, -1 if
/// strictly outside, 0 if on it. The simplex orientation may be either sign
/// but must be nonzero.
int insphere(int dim, std::span<const double* const> pts, const double* q);

/// Same as insphere for the circumsphere of a (dim-1)-face (dim points) taken
/// within the face's affine hull; q must lie in that hull.
int in_face_sphere(int dim, std::span<const double* const> face, const double* q);

}  // namespace rubbernet::predicates
