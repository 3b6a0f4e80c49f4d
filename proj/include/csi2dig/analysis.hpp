#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "csi2dig/csi.hpp"
#include "csi2dig/errors.hpp"

namespace csi2dig {

enum class CorrAxis { Temporal, Spatial };

struct CorrelationMatrix {
  CorrAxis axis = CorrAxis::Temporal;
  size_t dim = 0;
  std::vector<double> values;  // dim x dim, row-major

  double at(size_t i, size_t j) const { return values[i * dim + j]; }
};

// Standard PCC via centered two-pass sums; 0 when either vector is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::length_mismatch, "pearson inputs differ in length");
  if (x.size() < 2) fail(Errc::too_short, "pearson needs length >= 2");
  size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(std::span<const double>(x), std::span<const double>(y));
}

namespace analysis_detail {

// Pairwise PCC over a set of vectors laid out as rows of `vecs`.
inline CorrelationMatrix corr_matrix_of_rows(const std::vector<std::vector<double>>& vecs,
                                             CorrAxis axis) {
  CorrelationMatrix m;
  m.axis = axis;
  m.dim = vecs.size();
  m.values.assign(m.dim * m.dim, 1.0);
  for (size_t i = 0; i < m.dim; ++i) {
    for (size_t j = i + 1; j < m.dim; ++j) {
      double r = pearson(vecs[i], vecs[j]);
      m.values[i * m.dim + j] = r;
      m.values[j * m.dim + i] = r;
    }
  }
  return m;
}

inline std::vector<std::vector<double>> columns_of(const Sample& s) {
  std::vector<std::vector<double>> cols(s.n_cols, std::vector<double>(s.n_rows));
  for (size_t r = 0; r < s.n_rows; ++r)
    for (size_t c = 0; c < s.n_cols; ++c) cols[c][r] = s.at(r, c);
  return cols;
}

inline std::vector<std::vector<double>> rows_of(const Sample& s) {
  std::vector<std::vector<double>> rows(s.n_rows, std::vector<double>(s.n_cols));
  for (size_t r = 0; r < s.n_rows; ++r)
    for (size_t c = 0; c < s.n_cols; ++c) rows[r][c] = s.at(r, c);
  return rows;
}

}  // namespace analysis_detail

// C_t(i,j): pairwise correlation of subcarrier columns.
inline CorrelationMatrix temporal_corr_matrix(const Sample& s) {
  if (s.n_cols < 2) fail(Errc::too_short, "need >= 2 subcarriers");
  if (s.n_rows < 2) fail(Errc::too_short, "need >= 2 measurements");
  return analysis_detail::corr_matrix_of_rows(analysis_detail::columns_of(s), CorrAxis::Temporal);
}

// C_s(i,j): pairwise correlation of CSI measurement rows.
inline CorrelationMatrix spatial_corr_matrix(const Sample& s) {
  if (s.n_rows < 2) fail(Errc::too_short, "need >= 2 measurements");
  if (s.n_cols < 2) fail(Errc::too_short, "need >= 2 subcarriers");
  return analysis_detail::corr_matrix_of_rows(analysis_detail::rows_of(s), CorrAxis::Spatial);
}

// Per-column mean excluding the diagonal entry.
inline std::vector<double> column_mean_profile(const CorrelationMatrix& m) {
  std::vector<double> profile(m.dim, 0.0);
  if (m.dim < 2) return profile;
  for (size_t j = 0; j < m.dim; ++j) {
    double sum = 0.0;
    for (size_t i = 0; i < m.dim; ++i)
      if (i != j) sum += m.at(i, j);
    profile[j] = sum / static_cast<double>(m.dim - 1);
  }
  return profile;
}

// Mean PCC over all row pairs of two frame sets (Eq. 7/8 style).
inline double cross_mean_pcc(const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b) {
  if (a.empty() || b.empty()) fail(Errc::empty_input, "cross_mean_pcc needs nonempty inputs");
  size_t width = a.front().size();
  for (const auto& row : a)
    if (row.size() != width) fail(Errc::width_mismatch, "ragged rows in first input");
  for (const auto& row : b)
    if (row.size() != width) fail(Errc::width_mismatch, "subcarrier width differs");
  double sum = 0.0;
  for (const auto& ra : a)
    for (const auto& rb : b) sum += pearson(ra, rb);
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline double cross_mean_pcc(const Sample& a, const Sample& b) {
  return cross_mean_pcc(analysis_detail::rows_of(a), analysis_detail::rows_of(b));
}

inline double cross_mean_pcc(const CsiSequence& a, const CsiSequence& b) {
  std::vector<std::vector<double>> ra, rb;
  for (const auto& f : a.frames) ra.push_back(f.amplitudes);
  for (const auto& f : b.frames) rb.push_back(f.amplitudes);
  return cross_mean_pcc(ra, rb);
}

namespace analysis_detail {

// Classic DTW with |a-b| local cost, symmetric steps, no band.
inline double dtw_column(std::span<const double> a, std::span<const double> b) {
  size_t n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (size_t j = 1; j <= m; ++j) {
      double cost = std::abs(a[i - 1] - b[j - 1]);
      cur[j] = cost + std::min({prev[j - 1], prev[j], cur[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace analysis_detail

// Mean over subcarrier columns of per-column DTW distances. Inputs are
// expected already column-normalized (see normalize_sample).
inline double dtw_distance(const Sample& a, const Sample& b) {
  if (a.n_cols != b.n_cols) fail(Errc::width_mismatch, "subcarrier width differs");
  if (a.n_rows == 0 || b.n_rows == 0 || a.n_cols == 0) fail(Errc::empty_input, "empty matrix");
  auto ca = analysis_detail::columns_of(a);
  auto cb = analysis_detail::columns_of(b);
  double sum = 0.0;
  for (size_t c = 0; c < a.n_cols; ++c) sum += analysis_detail::dtw_column(ca[c], cb[c]);
  return sum / static_cast<double>(a.n_cols);
}

}  // namespace csi2dig
