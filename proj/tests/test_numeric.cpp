#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graphgeo/autograd.hpp"
#include "graphgeo/errors.hpp"
#include "graphgeo/optim.hpp"
#include "graphgeo/rng.hpp"
#include "graphgeo/tensor.hpp"

using namespace graphgeo;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, double lo, double hi) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// keeps |v| away from the ReLU kink
Tensor random_offzero(Rng& rng, std::vector<std::size_t> shape) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = rng.uniform(0.1, 1.0);
    t[i] = rng.uniform() < 0.5 ? -v : v;
  }
  return t;
}

} // namespace

TEST_CASE("affine forward") {
  Tape t;
  SUBCASE("identity") {
    NodeId x = t.leaf(Tensor::matrix({{1, 2}}));
    NodeId w = t.leaf(Tensor::matrix({{1, 0}, {0, 1}}));
    NodeId b = t.leaf(Tensor::vector({0, 0}));
    NodeId y = t.affine(x, w, b);
    CHECK(t.value(y) == Tensor::matrix({{1, 2}}));
  }
  SUBCASE("ones") {
    NodeId x = t.leaf(Tensor::matrix({{1, 1}}));
    NodeId w = t.leaf(Tensor::matrix({{1}, {1}}));
    NodeId b = t.leaf(Tensor::vector({1}));
    NodeId y = t.affine(x, w, b);
    CHECK(t.value(y) == Tensor::matrix({{3}}));
  }
  SUBCASE("shape mismatch") {
    NodeId x = t.leaf(Tensor::matrix({{1, 2, 3}}));
    NodeId w = t.leaf(Tensor::matrix({{1}, {1}}));
    NodeId b = t.leaf(Tensor::vector({0}));
    CHECK_THROWS_AS(t.affine(x, w, b), DimensionError);
  }
}

TEST_CASE("affine gradient wrt W equals columnwise sums of x for a sum loss") {
  Rng rng(1);
  Tensor xv = random_tensor(rng, {4, 3}, -2, 2);
  Tensor wv = random_tensor(rng, {3, 2}, -1, 1);
  Tensor bv = random_tensor(rng, {2}, -1, 1);

  Tape t;
  NodeId x = t.constant(xv);
  NodeId w = t.leaf(wv);
  NodeId b = t.leaf(bv);
  NodeId loss = t.sum_all(t.affine(x, w, b));
  Gradients g = t.backward(loss);
  Tensor dw = g.wrt(w);

  for (std::size_t k = 0; k < 3; ++k) {
    double col_sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) col_sum += xv.at(i, k);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(dw.at(k, j) == doctest::Approx(col_sum).epsilon(1e-12));
  }

  auto f = [&](const Tensor& wt) {
    Tape tt;
    NodeId ww = tt.leaf(wt);
    return tt.scalar_value(tt.sum_all(tt.affine(tt.constant(xv), ww, tt.constant(bv))));
  };
  CHECK(grad_check(f, wv, dw) < 1e-6);
}

TEST_CASE("relu") {
  Tape t;
  NodeId x = t.leaf(Tensor::vector({-1, 0, 2}));
  NodeId y = t.relu(x);
  CHECK(t.value(y) == Tensor::vector({0, 0, 2}));

  Tape t2;
  NodeId all_neg = t2.relu(t2.leaf(Tensor::vector({-5, -0.1, -7})));
  CHECK(t2.value(all_neg) == Tensor::vector({0, 0, 0}));

  // gradient mask = indicator(x > 0), checked away from the kink
  Rng rng(2);
  Tensor xv = random_offzero(rng, {6});
  Tape t3;
  NodeId xi = t3.leaf(xv);
  NodeId loss = t3.sum_all(t3.relu(xi));
  Tensor dx = t3.backward(loss).wrt(xi);
  for (std::size_t i = 0; i < xv.size(); ++i)
    CHECK(dx[i] == (xv[i] > 0.0 ? 1.0 : 0.0));
  auto f = [](const Tensor& v) {
    Tape tt;
    NodeId xx = tt.leaf(v);
    return tt.scalar_value(tt.sum_all(tt.relu(xx)));
  };
  CHECK(grad_check(f, xv, dx) < 1e-8);
}

TEST_CASE("sigmoid") {
  Tape t;
  NodeId y = t.sigmoid(t.leaf(Tensor::vector({0})));
  CHECK(t.value(y)[0] == doctest::Approx(0.5));

  Tape t2;
  NodeId z = t2.sigmoid(t2.leaf(Tensor::vector({-700, -30, 0, 30, 700})));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(t2.value(z)[i] > 0.0);
    CHECK(t2.value(z)[i] < 1.0);
  }

  // derivative at 0 is 0.25, from sigma * (1 - sigma)
  Tape t3;
  NodeId xi = t3.leaf(Tensor::vector({0}));
  Tensor dx = t3.backward(t3.sum_all(t3.sigmoid(xi))).wrt(xi);
  CHECK(dx[0] == doctest::Approx(0.25));
}

TEST_CASE("batch_norm train normalizes, eval is deterministic") {
  Rng rng(3);
  Tensor xv = random_tensor(rng, {16, 3}, -5, 5);

  SUBCASE("train mode output has mean 0 and variance 1 per column") {
    BatchNormState state(3);
    Tape t;
    NodeId x = t.constant(xv);
    NodeId y = t.batch_norm(x, t.constant(state.gamma), t.constant(state.beta), state);
    const Tensor& yv = t.value(y);
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 16; ++i) mean += yv.at(i, j);
      mean /= 16.0;
      double var = 0.0;
      for (std::size_t i = 0; i < 16; ++i) var += (yv.at(i, j) - mean) * (yv.at(i, j) - mean);
      var /= 16.0;
      CHECK(std::abs(mean) < 1e-5);
      CHECK(std::abs(var - 1.0) < 1e-5);
    }
  }

  SUBCASE("eval mode is a pure function of inputs and running stats") {
    BatchNormState state(3);
    state.training = true;
    {
      Tape warm;
      warm.batch_norm(warm.constant(xv), warm.constant(state.gamma),
                      warm.constant(state.beta), state);
    }
    state.training = false;
    Tensor rm = state.running_mean, rv = state.running_var;
    Tape a, b;
    NodeId ya = a.batch_norm(a.constant(xv), a.constant(state.gamma), a.constant(state.beta), state);
    NodeId yb = b.batch_norm(b.constant(xv), b.constant(state.gamma), b.constant(state.beta), state);
    CHECK(a.value(ya) == b.value(yb));
    CHECK(state.running_mean == rm); // eval leaves stats untouched
    CHECK(state.running_var == rv);
  }

  SUBCASE("train mode needs at least two rows") {
    BatchNormState state(3);
    Tape t;
    NodeId x = t.constant(Tensor::matrix({{1, 2, 3}}));
    CHECK_THROWS_AS(t.batch_norm(x, t.constant(state.gamma), t.constant(state.beta), state),
                    ValidationError);
  }

  SUBCASE("train-mode gradient wrt x matches finite differences") {
    Rng grng(4);
    Tensor x0 = random_tensor(grng, {6, 2}, -2, 2);
    Tensor g0 = random_tensor(grng, {2}, 0.5, 1.5);
    Tensor b0 = random_tensor(grng, {2}, -0.5, 0.5);

    auto f = [&](const Tensor& xt) {
      BatchNormState st(2);
      st.gamma = g0;
      st.beta = b0;
      st.training = true;
      Tape tt;
      NodeId xx = tt.leaf(xt);
      NodeId yy = tt.batch_norm(xx, tt.constant(st.gamma), tt.constant(st.beta), st);
      return tt.scalar_value(tt.mse_sum(yy, Tensor::full({6, 2}, 0.3)));
    };
    BatchNormState st(2);
    st.gamma = g0;
    st.beta = b0;
    st.training = true;
    Tape t;
    NodeId x = t.leaf(x0);
    NodeId gamma = t.leaf(st.gamma);
    NodeId beta = t.leaf(st.beta);
    NodeId y = t.batch_norm(x, gamma, beta, st);
    NodeId loss = t.mse_sum(y, Tensor::full({6, 2}, 0.3));
    Gradients grads = t.backward(loss);
    CHECK(grad_check(f, x0, grads.wrt(x)) < 1e-3);

    auto f_gamma = [&](const Tensor& gt) {
      BatchNormState st2(2);
      st2.gamma = gt;
      st2.beta = b0;
      st2.training = true;
      Tape tt;
      NodeId yy = tt.batch_norm(tt.leaf(x0), tt.leaf(gt), tt.constant(b0), st2);
      return tt.scalar_value(tt.mse_sum(yy, Tensor::full({6, 2}, 0.3)));
    };
    CHECK(grad_check(f_gamma, g0, grads.wrt(gamma)) < 1e-3);
  }
}

TEST_CASE("mse_sum") {
  Tape t;
  NodeId p = t.leaf(Tensor::matrix({{1, 0}}));
  CHECK(t.scalar_value(t.mse_sum(p, Tensor::matrix({{1, 0}}))) == 0.0);

  Tape t2;
  NodeId p2 = t2.leaf(Tensor::matrix({{1, 0}}));
  NodeId loss = t2.mse_sum(p2, Tensor::matrix({{0, 0}}));
  CHECK(t2.scalar_value(loss) == 1.0);

  // gradient = 2 (pred - target)
  Rng rng(5);
  Tensor pv = random_tensor(rng, {3, 2}, -2, 2);
  Tensor tv = random_tensor(rng, {3, 2}, -2, 2);
  Tape t3;
  NodeId pi = t3.leaf(pv);
  Tensor dp = t3.backward(t3.mse_sum(pi, tv)).wrt(pi);
  for (std::size_t i = 0; i < pv.size(); ++i)
    CHECK(dp[i] == doctest::Approx(2.0 * (pv[i] - tv[i])).epsilon(1e-12));
  auto f = [&](const Tensor& x) {
    Tape tt;
    NodeId xx = tt.leaf(x);
    return tt.scalar_value(tt.mse_sum(xx, tv));
  };
  CHECK(grad_check(f, pv, dp) < 1e-6);
}

TEST_CASE("backward contract") {
  SUBCASE("sum loss gives all-ones gradient") {
    Tape t;
    NodeId x = t.leaf(Tensor::matrix({{1, -2}, {3, 0.5}}));
    Tensor dx = t.backward(t.sum_all(x)).wrt(x);
    for (std::size_t i = 0; i < dx.size(); ++i) CHECK(dx[i] == 1.0);
  }
  SUBCASE("parameter unused by the loss gets a zero gradient") {
    Tape t;
    NodeId used = t.leaf(Tensor::vector({1, 2}));
    NodeId unused = t.leaf(Tensor::matrix({{4, 4}, {4, 4}}));
    Gradients g = t.backward(t.sum_all(used));
    Tensor du = g.wrt(unused);
    CHECK(du.same_shape(t.value(unused)));
    for (std::size_t i = 0; i < du.size(); ++i) CHECK(du[i] == 0.0);
  }
  SUBCASE("non-scalar root is rejected") {
    Tape t;
    NodeId x = t.leaf(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(t.backward(x), DimensionError);
  }
  SUBCASE("shared parameter accumulates") {
    Tape t;
    NodeId x = t.leaf(Tensor::vector({1.5}));
    NodeId y = t.add(x, x);
    Tensor dx = t.backward(t.sum_all(y)).wrt(x);
    CHECK(dx[0] == 2.0);
  }
}

TEST_CASE("adam") {
  AdamConfig cfg;
  SUBCASE("zero gradient is a fixed point with no decay") {
    Tensor p = Tensor::vector({1.0, -2.0});
    AdamState st;
    adam_step(p, Tensor::zeros({2}), st, cfg, 0.001, 0.0);
    CHECK(p == Tensor::vector({1.0, -2.0}));
  }
  SUBCASE("first step from zero with unit gradient moves by about -lr") {
    Tensor p = Tensor::vector({0.0});
    AdamState st;
    adam_step(p, Tensor::vector({1.0}), st, cfg, 0.001, 0.0);
    CHECK(p[0] == doctest::Approx(-0.001).epsilon(1e-6));
    CHECK(st.t == 1);
  }
  SUBCASE("decay shrinks a parameter with zero data gradient") {
    Tensor p = Tensor::vector({0.7});
    AdamState st;
    adam_step(p, Tensor::zeros({1}), st, cfg, 0.01, 0.01);
    CHECK(std::abs(p[0]) < 0.7);
  }
  SUBCASE("deterministic") {
    Rng rng(6);
    Tensor p1 = random_tensor(rng, {4}, -1, 1);
    Tensor p2 = p1;
    Tensor g = random_tensor(rng, {4}, -1, 1);
    AdamState s1, s2;
    for (int i = 0; i < 5; ++i) {
      adam_step(p1, g, s1, cfg, 0.01, 0.001);
      adam_step(p2, g, s2, cfg, 0.01, 0.001);
    }
    CHECK(p1 == p2);
  }
}

TEST_CASE("grad_check harness") {
  SUBCASE("quadratic") {
    auto f = [](const Tensor& x) { return x[0] * x[0]; };
    Tensor x = Tensor::vector({3.0});
    Tensor analytic = Tensor::vector({6.0});
    CHECK(grad_check(f, x, analytic) < 1e-6);
    Tensor numeric = finite_difference_gradient(f, x);
    CHECK(numeric[0] == doctest::Approx(6.0).epsilon(1e-7));
  }
  SUBCASE("constant function") {
    auto f = [](const Tensor&) { return 42.0; };
    Tensor x = Tensor::vector({1.0, 2.0});
    Tensor numeric = finite_difference_gradient(f, x);
    CHECK(numeric == Tensor::zeros({2}));
  }
}

TEST_CASE("composite affine/relu/sigmoid network passes the gradient oracle on 10 seeds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Tensor xv = random_offzero(rng, {3, 4});
    Tensor w1 = random_tensor(rng, {4, 5}, -0.8, 0.8);
    Tensor b1 = random_tensor(rng, {5}, 0.2, 0.6); // bias keeps preactivations off 0
    Tensor w2 = random_tensor(rng, {5, 2}, -0.8, 0.8);
    Tensor b2 = random_tensor(rng, {2}, -0.3, 0.3);
    Tensor target = random_tensor(rng, {3, 2}, 0.2, 0.8);

    Tape t;
    NodeId w1n = t.leaf(w1);
    NodeId h = t.relu(t.affine(t.constant(xv), w1n, t.constant(b1)));
    NodeId out = t.sigmoid(t.affine(h, t.constant(w2), t.constant(b2)));
    NodeId loss = t.mse_sum(out, target);
    if (t.min_abs_relu_input() < 1e-3) continue; // skip kink-adjacent draws
    Tensor analytic = t.backward(loss).wrt(w1n);

    auto f = [&](const Tensor& w1t) {
      Tape tt;
      NodeId ww = tt.leaf(w1t);
      NodeId hh = tt.relu(tt.affine(tt.constant(xv), ww, tt.constant(b1)));
      NodeId oo = tt.sigmoid(tt.affine(hh, tt.constant(w2), tt.constant(b2)));
      return tt.scalar_value(tt.mse_sum(oo, target));
    };
    CHECK(grad_check(f, w1, analytic) <= 1e-3);
  }
}

TEST_CASE("mp_aggregate matches a hand-rolled oracle and its gradient checks out") {
  // path graph 0 - 1 - 2, two undirected edges
  AdjacencyList adj(3);
  adj[0] = {{1, 0}};
  adj[1] = {{0, 0}, {2, 1}};
  adj[2] = {{1, 1}};
  const std::size_t g = 3;

  Rng rng(9);
  Tensor hv = random_offzero(rng, {3, g});
  Tensor uv = random_tensor(rng, {2, g * g}, -1, 1);

  for (Aggregator agg : {Aggregator::Sum, Aggregator::Mean, Aggregator::Max}) {
    std::string agg_name = to_string(agg);
    CAPTURE(agg_name);
    Tape t;
    NodeId h = t.leaf(hv);
    NodeId u = t.leaf(uv);
    NodeId a = t.mp_aggregate(h, u, adj, agg);
    const Tensor& av = t.value(a);

    // independent re-computation, message by message
    for (std::size_t i = 0; i < 3; ++i) {
      std::vector<std::vector<double>> msgs;
      for (const NeighborRef& nb : adj[i]) {
        std::vector<double> m(g, 0.0);
        for (std::size_t r = 0; r < g; ++r)
          for (std::size_t c = 0; c < g; ++c)
            m[r] += uv.at(static_cast<std::size_t>(nb.edge), r * g + c) *
                    hv.at(static_cast<std::size_t>(nb.node), c);
        msgs.push_back(std::move(m));
      }
      for (std::size_t r = 0; r < g; ++r) {
        double expect = 0.0;
        if (agg == Aggregator::Max) {
          expect = msgs[0][r];
          for (const auto& m : msgs) expect = std::max(expect, m[r]);
        } else {
          for (const auto& m : msgs) expect += m[r];
          if (agg == Aggregator::Mean) expect /= static_cast<double>(msgs.size());
        }
        CHECK(av.at(i, r) == doctest::Approx(expect).epsilon(1e-12));
      }
    }

    // finite differences wrt both node embeddings and edge weights
    Tensor target = random_tensor(rng, {3, g}, -1, 1);
    Tape t2;
    NodeId h2 = t2.leaf(hv);
    NodeId u2 = t2.leaf(uv);
    NodeId loss = t2.mse_sum(t2.mp_aggregate(h2, u2, adj, agg), target);
    Gradients grads = t2.backward(loss);
    auto f_h = [&](const Tensor& ht) {
      Tape tt;
      NodeId hh = tt.leaf(ht);
      return tt.scalar_value(tt.mse_sum(tt.mp_aggregate(hh, tt.constant(uv), adj, agg), target));
    };
    auto f_u = [&](const Tensor& ut) {
      Tape tt;
      NodeId uu = tt.leaf(ut);
      return tt.scalar_value(tt.mse_sum(tt.mp_aggregate(tt.constant(hv), uu, adj, agg), target));
    };
    CHECK(grad_check(f_h, hv, grads.wrt(h2)) <= 1e-3);
    CHECK(grad_check(f_u, uv, grads.wrt(u2)) <= 1e-3);
  }
}

TEST_CASE("empty neighbor set aggregates to a zero row") {
  AdjacencyList adj(2);
  adj[0] = {};
  adj[1] = {};
  Tape t;
  NodeId h = t.leaf(Tensor::matrix({{1, 2}, {3, 4}}));
  NodeId u = t.leaf(Tensor::zeros({1, 4}));
  for (Aggregator agg : {Aggregator::Sum, Aggregator::Mean, Aggregator::Max}) {
    NodeId a = t.mp_aggregate(h, u, adj, agg);
    CHECK(t.value(a) == Tensor::zeros({2, 2}));
  }
}

TEST_CASE("tensors stay finite under bounded op chains") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    NodeId x = t.leaf(random_tensor(rng, {4, 4}, -1e6, 1e6));
    NodeId w = t.leaf(random_tensor(rng, {4, 4}, -1e6, 1e6));
    NodeId b = t.leaf(random_tensor(rng, {4}, -1e6, 1e6));
    NodeId y = t.affine(x, w, b);
    y = t.sigmoid(y); // squashes anything finite into (0,1)
    y = t.relu(t.affine(y, w, b));
    y = t.add(y, y);
    CHECK(t.value(y).all_finite());
  }
}

TEST_CASE("aggregator names parse and reject unknowns") {
  CHECK(aggregator_from_string("mean") == Aggregator::Mean);
  CHECK(aggregator_from_string("sum") == Aggregator::Sum);
  CHECK(aggregator_from_string("max") == Aggregator::Max);
  CHECK_THROWS_AS(aggregator_from_string("median"), ConfigError);
}
