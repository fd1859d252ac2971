#pragma once
// System 2: GNN propagation over the cognitive graph with per-node gates and
// hand-derived backpropagation.
//
// One propagation step, with X the n-by-H node representations:
//   S = gelu(X * W1)
//   M = (A D^-1)^T * S          // predecessor features, in-degree averaged
//   D = gelu(M), row v scaled by alpha[v]
//   X' = gelu(X * W2 + D)
// A has rows = sources, columns = targets; D_jj is the in-degree of j, and
// zero-in-degree columns stay zero (the 1/0 -> 0 guard).

#include "hopqa/graph.hpp"
#include "hopqa/math.hpp"

#include <functional>
#include <vector>

namespace hopqa {

struct ReasonerParams {
    Matrix W1;
    Matrix W2;

    // Uniform in [-1/sqrt(H), +1/sqrt(H)].
    static ReasonerParams init(int hidden, SplitMix64& rng);
};

struct HiddenState {
    Matrix X;      // one row per node
    Vector alpha;  // per-node gates, default all 1
};

// Column-normalized adjacency A D^-1 for the graph's current edge set.
Matrix normalize_adjacency(const std::vector<Edge>& edges, int n);
Matrix normalize_adjacency(const CognitiveGraph& graph);

// One propagation step.
Matrix propagate(const Matrix& X, const Matrix& adinv, const ReasonerParams& params,
                 const Vector& alpha);

// One propagation step restricted to a single row (asynchronous updating).
Vector propagate_row(const Matrix& X, const Matrix& adinv, const ReasonerParams& params,
                     const Vector& alpha, int row);

// Cached forward pass over `steps` propagation steps.
struct StepCache {
    Matrix X_in;  // input of the step
    Matrix P;     // X_in * W1
    Matrix M;     // (A D^-1)^T * gelu(P)
    Matrix D;     // gelu(M), pre-gate
    Matrix Z;     // X_in * W2 + diag(alpha) * D
};

struct ForwardCache {
    std::vector<StepCache> steps;
    Matrix x_final;
};

ForwardCache forward_steps(const Matrix& X0, const Matrix& adinv, const ReasonerParams& params,
                           const Vector& alpha, int steps);

struct ReasonerGrads {
    Matrix dW1;
    Matrix dW2;
    Matrix dX0;
    Vector dalpha;
};

// Exact gradients of the composed steps given dL/dX_final.
ReasonerGrads backward_steps(const ForwardCache& cache, const Matrix& adinv,
                             const ReasonerParams& params, const Vector& alpha,
                             const Matrix& dx_final);

// Batch updating: X0 from the nodes' sem vectors (zero rows where sem is
// missing), alpha = 1, `steps` propagation steps.
HiddenState run_reasoner(const CognitiveGraph& graph, const ReasonerParams& params, int steps);

// dL/dalpha at alpha = 1, for explainability ranking. `loss_grad` maps the
// final X to dL/dX_final.
Vector node_relevance(const CognitiveGraph& graph, const ReasonerParams& params, int steps,
                      const std::function<Matrix(const Matrix&)>& loss_grad);

}  // namespace hopqa
