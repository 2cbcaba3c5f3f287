#pragma once

#include <span>
#include <string_view>

#include "s3cm/core.hpp"

// Data-parallel inner loops. Every kernel has a serial reference version and
// an OpenMP version; both produce bitwise-identical results because each
// output entry is computed by the same sequential expression.
namespace s3cm::kernels {

enum class Backend { serial, openmp };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

/// Number of threads the OpenMP backend will use (1 without OpenMP).
int max_threads();

/// Rows are processed in fixed blocks of this size; partial results are
/// combined in block order so the thread count never changes the bits.
inline constexpr Eigen::Index kRowBlock = 256;

/// M_ij = exp(-sigma ||a_i - a_j||^2) * b_i * b_j for one example per row of
/// `features` (d x p).
RowMatrix gaussian_kernel_matrix(const RowMatrix& features, const Vector& labels, double sigma,
                                 Backend backend);

/// out = M x, one dot product per output row.
void matvec(const RowMatrix& m, const Vector& x, Vector& out, Backend backend);

/// out = scale * A^T (A x - targets), the least-squares gradient kernel.
void least_squares_gradient(const RowMatrix& a, const Vector& x, const Vector& targets,
                            double scale, Vector& out, Backend backend);

}  // namespace s3cm::kernels
