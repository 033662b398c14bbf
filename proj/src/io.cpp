#include "rpcg/core/io.hpp"

#include <fstream>
#include <vector>

#include "rpcg/core/format.hpp"

namespace rpcg {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const SpdMatrix<double>& a) {
  const SparseMatrix<double> s = a.to_sparse();
  auto out = open_out(path);
  out << s.rows() << ' ' << s.nonZeros() << '\n';
  for (Index i = 0; i < s.outerSize(); ++i) {
    for (SparseMatrix<double>::InnerIterator it(s, i); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << shortest(it.value()) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SpdMatrix<double> load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  long long d = 0;
  long long nnz = 0;
  if (!(in >> d >> nnz) || d < 1 || nnz < 0) throw IoError(path.string() + ": bad header, expected 'd nnz'");
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0;
    long long j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw IoError(path.string() + ": truncated triplet list");
    if (i < 0 || j < 0 || i >= d || j >= d) throw IoError(path.string() + ": index out of range");
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix<double> s(d, d);
  s.setFromTriplets(triplets.begin(), triplets.end());
  if (4 * s.nonZeros() > d * d) return SpdMatrix<double>::from_dense(MatrixXd(s));
  return SpdMatrix<double>::from_sparse(std::move(s));
}

void save_vector(const std::filesystem::path& path, const VectorXd& v) {
  auto out = open_out(path);
  for (Index i = 0; i < v.size(); ++i) out << shortest(v[i]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

VectorXd load_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw IoError(path.string() + ": unparsable value");
  if (values.empty()) throw IoError(path.string() + ": empty vector");
  VectorXd out = Eigen::Map<VectorXd>(values.data(), static_cast<Index>(values.size()));
  if (!out.allFinite()) throw IoError(path.string() + ": non-finite value");
  return out;
}

}  // namespace rpcg
