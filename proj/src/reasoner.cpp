#include "hopqa/reasoner.hpp"

#include <cmath>

namespace hopqa {

ReasonerParams ReasonerParams::init(int hidden, SplitMix64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    ReasonerParams p;
    p.W1.resize(hidden, hidden);
    p.W2.resize(hidden, hidden);
    for (Matrix* w : {&p.W1, &p.W2}) {
        for (Eigen::Index i = 0; i < w->rows(); ++i) {
            for (Eigen::Index j = 0; j < w->cols(); ++j) {
                (*w)(i, j) = rng.uniform(-bound, bound);
            }
        }
    }
    return p;
}

Matrix normalize_adjacency(const std::vector<Edge>& edges, int n) {
    Matrix a = Matrix::Zero(n, n);
    for (const Edge& e : edges) a(e.src, e.dst) = 1.0;
    for (int j = 0; j < n; ++j) {
        const double colsum = a.col(j).sum();
        if (colsum > 0.0) a.col(j) /= colsum;
    }
    return a;
}

Matrix normalize_adjacency(const CognitiveGraph& graph) {
    return normalize_adjacency(graph.edges(), graph.node_count());
}

Matrix propagate(const Matrix& X, const Matrix& adinv, const ReasonerParams& params,
                 const Vector& alpha) {
    Matrix delta = gelu((adinv.transpose() * gelu(X * params.W1)).eval());
    delta.array().colwise() *= alpha.array();
    return gelu((X * params.W2 + delta).eval());
}

Vector propagate_row(const Matrix& X, const Matrix& adinv, const ReasonerParams& params,
                     const Vector& alpha, int row) {
    // Messages into `row`: column `row` of A D^-1 against all transformed rows.
    Vector msg = gelu((gelu(X * params.W1).transpose() * adinv.col(row)).eval());
    msg *= alpha(row);
    return gelu((params.W2.transpose() * X.row(row).transpose() + msg).eval());
}

ForwardCache forward_steps(const Matrix& X0, const Matrix& adinv, const ReasonerParams& params,
                           const Vector& alpha, int steps) {
    ForwardCache cache;
    Matrix x = X0;
    for (int s = 0; s < steps; ++s) {
        StepCache sc;
        sc.X_in = x;
        sc.P = x * params.W1;
        sc.M = adinv.transpose() * gelu(sc.P);
        sc.D = gelu(sc.M);
        Matrix gated = sc.D;
        gated.array().colwise() *= alpha.array();
        sc.Z = x * params.W2 + gated;
        x = gelu(sc.Z);
        cache.steps.push_back(std::move(sc));
    }
    cache.x_final = std::move(x);
    return cache;
}

ReasonerGrads backward_steps(const ForwardCache& cache, const Matrix& adinv,
                             const ReasonerParams& params, const Vector& alpha,
                             const Matrix& dx_final) {
    const Eigen::Index h = params.W1.rows();
    ReasonerGrads g;
    g.dW1 = Matrix::Zero(h, h);
    g.dW2 = Matrix::Zero(h, h);
    g.dalpha = Vector::Zero(alpha.size());

    Matrix dx = dx_final;
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
        const StepCache& sc = *it;
        const Matrix dz = dx.cwiseProduct(gelu_prime(sc.Z));
        g.dW2 += sc.X_in.transpose() * dz;
        Matrix dprev = dz * params.W2.transpose();

        // Gate: row v of the gated message is alpha[v] * D[v].
        g.dalpha += dz.cwiseProduct(sc.D).rowwise().sum();
        Matrix dd = dz;
        dd.array().colwise() *= alpha.array();

        const Matrix dm = dd.cwiseProduct(gelu_prime(sc.M));
        const Matrix ds = adinv * dm;
        const Matrix dp = ds.cwiseProduct(gelu_prime(sc.P));
        g.dW1 += sc.X_in.transpose() * dp;
        dprev += dp * params.W1.transpose();

        dx = std::move(dprev);
    }
    g.dX0 = std::move(dx);
    return g;
}

HiddenState run_reasoner(const CognitiveGraph& graph, const ReasonerParams& params, int steps) {
    const int n = graph.node_count();
    const Eigen::Index h = params.W1.rows();
    HiddenState state;
    state.X = Matrix::Zero(n, h);
    state.alpha = Vector::Ones(n);
    for (const Node& node : graph.nodes()) {
        if (node.sem) state.X.row(node.id) = node.sem->transpose();
    }
    const Matrix adinv = normalize_adjacency(graph);
    for (int s = 0; s < steps; ++s) {
        state.X = propagate(state.X, adinv, params, state.alpha);
    }
    return state;
}

Vector node_relevance(const CognitiveGraph& graph, const ReasonerParams& params, int steps,
                      const std::function<Matrix(const Matrix&)>& loss_grad) {
    const int n = graph.node_count();
    const Eigen::Index h = params.W1.rows();
    Matrix x0 = Matrix::Zero(n, h);
    for (const Node& node : graph.nodes()) {
        if (node.sem) x0.row(node.id) = node.sem->transpose();
    }
    const Vector alpha = Vector::Ones(n);
    const Matrix adinv = normalize_adjacency(graph);
    const ForwardCache cache = forward_steps(x0, adinv, params, alpha, steps);
    const Matrix upstream = loss_grad(cache.x_final);
    return backward_steps(cache, adinv, params, alpha, upstream).dalpha;
}

}  // namespace hopqa
