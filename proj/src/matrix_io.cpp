#include "opsplit/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace opsplit {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const auto& obj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_matrix_market(os, obj);
}

}  // namespace

void write_matrix_market(std::ostream& os, const MatrixXd& m) {
    os << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) os << fmt(m(r, c)) << '\n';
}

void write_matrix_market(std::ostream& os, const SparseMatrix<double>& m) {
    os << "%%MatrixMarket matrix coordinate real general\n"
       << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix<double>::InnerIterator it(m, r); it; ++it)
            os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt(it.value()) << '\n';
}

void write_matrix_market(std::ostream& os, const VectorXd& v) {
    write_matrix_market(os, MatrixXd(v));
}

void export_problem(const SplitProblem<double>& p, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (p.f.kind() == SmoothKind::LeastSquares) {
        write_file(dir / "A.mtx", SparseMatrix<double>(to_dense(p.f.op()).sparseView()));
        write_file(dir / "b.mtx", p.f.data());
    }
    write_file(dir / "B.mtx", SparseMatrix<double>(to_dense(p.B).sparseView()));
    if (p.ground_truth) write_file(dir / "x_true.mtx", *p.ground_truth);
    if (p.initial_point) write_file(dir / "x0.mtx", *p.initial_point);
}

}  // namespace opsplit
