#pragma once

#include <filesystem>
#include <ostream>

#include "opsplit/problem.hpp"

namespace opsplit {

// Matrix Market text output (https://math.nist.gov/MatrixMarket/formats.html), values
// printed with 17 significant digits so they read back bit-exactly.

void write_matrix_market(std::ostream& os, const MatrixXd& m);
void write_matrix_market(std::ostream& os, const SparseMatrix<double>& m);
void write_matrix_market(std::ostream& os, const VectorXd& v);

/// Writes A.mtx (the data operator, materialized when it is matrix-free), b.mtx, B.mtx,
/// and x_true.mtx / x0.mtx when present.
void export_problem(const SplitProblem<double>& p, const std::filesystem::path& dir);

}  // namespace opsplit
