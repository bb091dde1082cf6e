#pragma once

#include <span>

#include "highway/matrix.hpp"

namespace highway::kernels {

// Serial reference kernels. The `par` variants must produce bitwise-identical
// output: both accumulate every output row in the same order, parallelism only
// changes which thread owns a row. Tests compare the two directly.
namespace serial {

// out = A * B, where A is the structure of `a` with entry values `vals`
// (pass a.val for the stored values; a substitute of equal length otherwise).
void spmm(const CsrMatrix& a, std::span<const double> vals, const Matrix& b, Matrix& out);

// out = A^T * B; `at` is the transpose index of `a`.
void spmm_tn(const CsrMatrix& a, const CscIndex& at, std::span<const double> vals,
             const Matrix& b, Matrix& out);

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out);  // out = A * B
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out);  // out = A^T * B
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out);  // out = A * B^T

void relu(const Matrix& in, Matrix& out);
void softmax_rows(const Matrix& logits, Matrix& probs);

}  // namespace serial

// OpenMP-parallel kernels (plain serial code when built without OpenMP).
namespace par {

void spmm(const CsrMatrix& a, std::span<const double> vals, const Matrix& b, Matrix& out);
void spmm_tn(const CsrMatrix& a, const CscIndex& at, std::span<const double> vals,
             const Matrix& b, Matrix& out);
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out);
void relu(const Matrix& in, Matrix& out);
void softmax_rows(const Matrix& logits, Matrix& probs);

}  // namespace par

// Entry points used by the model.
inline void spmm(const CsrMatrix& a, std::span<const double> vals, const Matrix& b, Matrix& out) {
    par::spmm(a, vals, b, out);
}
inline void spmm(const CsrMatrix& a, const Matrix& b, Matrix& out) {
    par::spmm(a, std::span<const double>(a.val), b, out);
}
inline void spmm_tn(const CsrMatrix& a, const CscIndex& at, std::span<const double> vals,
                    const Matrix& b, Matrix& out) {
    par::spmm_tn(a, at, vals, b, out);
}
inline void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out) { par::gemm_nn(a, b, out); }
inline void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) { par::gemm_tn(a, b, out); }
inline void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) { par::gemm_nt(a, b, out); }
inline void relu(const Matrix& in, Matrix& out) { par::relu(in, out); }
inline void softmax_rows(const Matrix& logits, Matrix& probs) { par::softmax_rows(logits, probs); }

int max_threads();
void set_threads(int n);

}  // namespace highway::kernels
