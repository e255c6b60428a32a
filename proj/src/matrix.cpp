#include "topicforge/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "topicforge/errors.hpp"

namespace topicforge {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  SparseMatrix m(rows, cols);
  m.col_index_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (t.row >= rows || t.col >= cols) throw ValidationError("sparse triplet out of bounds");
    if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_index_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), static_cast<std::uint32_t>(c));
  if (it == idx.end() || *it != c) return 0.0;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - idx.begin())];
}

std::vector<double> SparseMatrix::dense_row(std::size_t r) const {
  std::vector<double> out(cols_, 0.0);
  auto idx = row_indices(r);
  auto val = row_values(r);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = val[k];
  return out;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k)
      out.push_back({static_cast<std::uint32_t>(r), idx[k], val[k]});
  }
  return out;
}

double sparse_cosine(const SparseMatrix& a, std::size_t row_a, const SparseMatrix& b, std::size_t row_b) {
  auto ia = a.row_indices(row_a);
  auto va = a.row_values(row_a);
  auto ib = b.row_indices(row_b);
  auto vb = b.row_values(row_b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (double v : va) na += v * v;
  for (double v : vb) nb += v * v;
  std::size_t i = 0, j = 0;
  while (i < ia.size() && j < ib.size()) {
    if (ia[i] < ib[j]) {
      ++i;
    } else if (ib[j] < ia[i]) {
      ++j;
    } else {
      dot += va[i++] * vb[j++];
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace topicforge
