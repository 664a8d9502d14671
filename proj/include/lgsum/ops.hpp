#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lgsum/matrix.hpp"
#include "lgsum/tape.hpp"

namespace lgsum::numerics {

// ---- plain forward operations ------------------------------------------

// Row softmax with max-subtraction. mask (optional) is a row-major 0/1 array
// of the same shape; masked-out entries get probability exactly 0. A row with
// no unmasked entry throws "degenerate attention row".
DenseMatrix softmax_rows(const DenseMatrix& m, const std::uint8_t* mask = nullptr);

// Normalizes x to zero mean / unit population variance, then applies the
// affine gain/bias. eps guards constant input.
std::vector<double> layer_norm(const std::vector<double>& x, const std::vector<double>& gain,
                               const std::vector<double>& bias, double eps = 1e-5);

// y = W2 * relu(W1 * x + b1) + b2, with W1 (h x n) and W2 (o x h).
std::vector<double> ffn_forward(const std::vector<double>& x, const DenseMatrix& w1,
                                const std::vector<double>& b1, const DenseMatrix& w2,
                                const std::vector<double>& b2);

// Mean negative log-softmax probability of targets over non-pad positions.
double cross_entropy(const DenseMatrix& logits, const std::vector<int>& targets, int pad_index);

// ---- tape operations -----------------------------------------------------

int op_matmul(Tape& t, int a, int b);    // A*B
int op_matmul_nt(Tape& t, int a, int b); // A*B^T (B stored row-major, untransposed)
int op_add(Tape& t, int a, int b);
int op_sub(Tape& t, int a, int b);
int op_hadamard(Tape& t, int a, int b);
int op_scale(Tape& t, int a, double alpha);
int op_add_rowvec(Tape& t, int a, int bias); // bias is 1 x cols, broadcast over rows
int op_relu(Tape& t, int a);
int op_softmax_rows(Tape& t, int a, std::shared_ptr<const std::vector<std::uint8_t>> mask = nullptr);
int op_layer_norm_rows(Tape& t, int x, int gain, int bias, double eps);
int op_concat_cols(Tape& t, const std::vector<int>& parts);
int op_slice_rows(Tape& t, int a, int row_begin, int row_end);
int op_dropout(Tape& t, int a, double rate); // identity unless t.training and rate > 0
int op_embedding_rows(Tape& t, int table, std::vector<int> indices);

// Sum (not mean) of per-position negative log-likelihood over non-pad targets;
// non_pad_count receives the number of contributing positions. The training
// loop divides by the total token count of the accumulation window.
int op_cross_entropy_sum(Tape& t, int logits, std::vector<int> targets, int pad_index,
                         double label_smoothing, int* non_pad_count);

} // namespace lgsum::numerics
