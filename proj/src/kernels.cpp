#include "highway/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace highway {

CscIndex build_csc_index(const CsrMatrix& m) {
    CscIndex t;
    t.col_ptr.assign(m.cols + 1, 0);
    t.row.resize(m.col.size());
    t.pos.resize(m.col.size());
    for (int c : m.col) ++t.col_ptr[c + 1];
    for (int c = 0; c < m.cols; ++c) t.col_ptr[c + 1] += t.col_ptr[c];
    std::vector<int> next(t.col_ptr.begin(), t.col_ptr.end() - 1);
    // rows visited in ascending order, so rows ascend within each column
    for (int i = 0; i < m.rows; ++i) {
        for (int e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e) {
            int slot = next[m.col[e]]++;
            t.row[slot] = i;
            t.pos[slot] = e;
        }
    }
    return t;
}

}  // namespace highway

namespace highway::kernels {

namespace {

void check(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

// Single-row bodies shared by the serial and parallel drivers; one thread owns
// one output row, accumulation order inside a row is fixed.

inline void spmm_row(const CsrMatrix& a, const double* vals, const Matrix& b, Matrix& out, int i) {
    double* orow = out.row(i);
    for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
        const double v = vals[e];
        const double* brow = b.row(a.col[e]);
        for (int c = 0; c < b.cols; ++c) orow[c] += v * brow[c];
    }
}

inline void spmm_tn_row(const CscIndex& at, const double* vals, const Matrix& b, Matrix& out, int k) {
    double* orow = out.row(k);
    for (int e = at.col_ptr[k]; e < at.col_ptr[k + 1]; ++e) {
        const double v = vals[at.pos[e]];
        const double* brow = b.row(at.row[e]);
        for (int c = 0; c < b.cols; ++c) orow[c] += v * brow[c];
    }
}

inline void gemm_nn_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) {
        const double v = arow[k];
        if (v == 0.0) continue;  // ReLU outputs are mostly zero
        const double* brow = b.row(k);
        for (int j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
    }
}

inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& out, int k) {
    double* orow = out.row(k);
    for (int i = 0; i < a.rows; ++i) {
        const double v = a.at(i, k);
        if (v == 0.0) continue;
        const double* brow = b.row(i);
        for (int j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
    }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
        const double* brow = b.row(j);
        double s = 0.0;
        for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
        orow[j] = s;
    }
}

inline void relu_row(const Matrix& in, Matrix& out, int i) {
    const double* irow = in.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < in.cols; ++j) orow[j] = irow[j] > 0.0 ? irow[j] : 0.0;
}

inline void softmax_row(const Matrix& logits, Matrix& probs, int i) {
    const double* lrow = logits.row(i);
    double* prow = probs.row(i);
    double mx = lrow[0];
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, lrow[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
        prow[j] = std::exp(lrow[j] - mx);
        sum += prow[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < logits.cols; ++j) prow[j] *= inv;
}

}  // namespace

namespace serial {

void spmm(const CsrMatrix& a, std::span<const double> vals, const Matrix& b, Matrix& out) {
    check(a.cols == b.rows, "spmm: inner dimension mismatch");
    check(static_cast<int>(vals.size()) == a.nnz(), "spmm: value array size mismatch");
    out.reset(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) spmm_row(a, vals.data(), b, out, i);
}

void spmm_tn(const CsrMatrix& a, const CscIndex& at, std::span<const double> vals,
             const Matrix& b, Matrix& out) {
    check(a.rows == b.rows, "spmm_tn: inner dimension mismatch");
    check(static_cast<int>(vals.size()) == a.nnz(), "spmm_tn: value array size mismatch");
    out.reset(a.cols, b.cols);
    for (int k = 0; k < a.cols; ++k) spmm_tn_row(at, vals.data(), b, out, k);
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.cols == b.rows, "gemm_nn: inner dimension mismatch");
    out.reset(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) gemm_nn_row(a, b, out, i);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.rows == b.rows, "gemm_tn: inner dimension mismatch");
    out.reset(a.cols, b.cols);
    for (int k = 0; k < a.cols; ++k) gemm_tn_row(a, b, out, k);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.cols == b.cols, "gemm_nt: inner dimension mismatch");
    out.reset(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) gemm_nt_row(a, b, out, i);
}

void relu(const Matrix& in, Matrix& out) {
    out.reset(in.rows, in.cols);
    for (int i = 0; i < in.rows; ++i) relu_row(in, out, i);
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
    check(logits.cols >= 1, "softmax_rows: empty rows");
    probs.reset(logits.rows, logits.cols);
    for (int i = 0; i < logits.rows; ++i) softmax_row(logits, probs, i);
}

}  // namespace serial

namespace par {

void spmm(const CsrMatrix& a, std::span<const double> vals, const Matrix& b, Matrix& out) {
    check(a.cols == b.rows, "spmm: inner dimension mismatch");
    check(static_cast<int>(vals.size()) == a.nnz(), "spmm: value array size mismatch");
    out.reset(a.rows, b.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) spmm_row(a, vals.data(), b, out, i);
}

void spmm_tn(const CsrMatrix& a, const CscIndex& at, std::span<const double> vals,
             const Matrix& b, Matrix& out) {
    check(a.rows == b.rows, "spmm_tn: inner dimension mismatch");
    check(static_cast<int>(vals.size()) == a.nnz(), "spmm_tn: value array size mismatch");
    out.reset(a.cols, b.cols);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < a.cols; ++k) spmm_tn_row(at, vals.data(), b, out, k);
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.cols == b.rows, "gemm_nn: inner dimension mismatch");
    out.reset(a.rows, b.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) gemm_nn_row(a, b, out, i);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.rows == b.rows, "gemm_tn: inner dimension mismatch");
    out.reset(a.cols, b.cols);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < a.cols; ++k) gemm_tn_row(a, b, out, k);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    check(a.cols == b.cols, "gemm_nt: inner dimension mismatch");
    out.reset(a.rows, b.rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows; ++i) gemm_nt_row(a, b, out, i);
}

void relu(const Matrix& in, Matrix& out) {
    out.reset(in.rows, in.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in.rows; ++i) relu_row(in, out, i);
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
    check(logits.cols >= 1, "softmax_rows: empty rows");
    probs.reset(logits.rows, logits.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < logits.rows; ++i) softmax_row(logits, probs, i);
}

}  // namespace par

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace highway::kernels
