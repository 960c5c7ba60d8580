#include <doctest.h>

#include "gradient_check.hpp"
#include "neuroplan/io.hpp"
#include "neuroplan/nn.hpp"
#include "test_helpers.hpp"

using namespace neuroplan;
using namespace neuroplan::test;

TEST_SUITE_BEGIN("neural");

namespace {

MlpModel random_3layer(std::uint64_t seed, bool dropout = false) {
    return make_mlp({6, 10, 8, 3}, {true, true, false},
                    {dropout, dropout, false}, dropout ? 0.5 : 0.0, seed);
}

Matrix random_batch(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix X(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) X(r, c) = rng.uniform(-1.0, 1.0);
    return X;
}

} // namespace

TEST_CASE("forward: zero weights and bias give zero output") {
    MlpModel m = random_3layer(1);
    for (auto& l : m.layers) {
        l.W.setZero();
        l.b.setZero();
    }
    const Vector y = forward(m, Vector::Random(6), Mode::eval_deterministic);
    CHECK(y.norm() == 0.0);
}

TEST_CASE("forward: identity layer passes positive input through") {
    MlpModel m;
    LinearLayer l;
    l.W = Matrix::Identity(4, 4);
    l.b = Vector::Zero(4);
    l.has_prelu = true;
    m.layers.push_back(l);
    Vector x(4);
    x << 1.0, 2.0, 0.5, 3.0;
    const Vector y = forward(m, x, Mode::eval_deterministic);
    CHECK((y - x).norm() == 0.0);
}

TEST_CASE("forward: shape mismatch throws") {
    const MlpModel m = random_3layer(2);
    CHECK_THROWS_AS(forward(m, Vector::Zero(5), Mode::eval_deterministic),
                    std::invalid_argument);
}

TEST_CASE("forward: eval-stochastic is reproducible for a fixed seed") {
    const MlpModel m = random_3layer(3, true);
    const Vector x = Vector::Random(6);
    Rng r1(42), r2(42), r3(43);
    const Vector a = forward(m, x, Mode::eval_stochastic, &r1);
    const Vector b = forward(m, x, Mode::eval_stochastic, &r2);
    CHECK((a - b).norm() == 0.0);
    // different streams generally differ
    const Vector c = forward(m, x, Mode::eval_stochastic, &r3);
    CHECK((a - c).norm() > 0.0);
}

TEST_CASE("forward: eval-deterministic is pure and consumes no rng") {
    const MlpModel m = random_3layer(4, true);
    const Vector x = Vector::Random(6);
    Rng rng(5);
    const double before = rng.uniform01();
    Rng replay(5);
    const Vector a = forward(m, x, Mode::eval_deterministic, &replay);
    CHECK(replay.uniform01() == before); // untouched stream
    const Vector b = forward(m, x, Mode::eval_deterministic);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("dropout: unit survival frequency stays near 1-p") {
    MlpModel m;
    LinearLayer l;
    l.W = Matrix::Identity(8, 8);
    l.b = Vector::Zero(8);
    l.has_dropout = true;
    m.layers.push_back(l);
    m.dropout_p = 0.5;

    Vector x = Vector::Ones(8);
    Rng rng(11);
    Eigen::VectorXd survived = Eigen::VectorXd::Zero(8);
    const int passes = 10000;
    for (int i = 0; i < passes; ++i) {
        const Vector y = forward(m, x, Mode::train, &rng);
        for (int k = 0; k < 8; ++k)
            if (y(k) != 0.0) {
                survived(k) += 1.0;
                CHECK(y(k) == doctest::Approx(2.0)); // inverted dropout scaling
            }
    }
    for (int k = 0; k < 8; ++k) {
        const double freq = survived(k) / passes;
        CHECK(freq >= 0.48);
        CHECK(freq <= 0.52);
    }
}

TEST_CASE("backward: zero loss gradient gives zero parameter gradients") {
    const MlpModel m = random_3layer(6);
    const Matrix X = random_batch(4, 6, 7);
    ForwardCache cache;
    Rng rng(8);
    forward_batch(m, X, Mode::train, &rng, &cache);
    const Gradients g = backward(m, cache, Matrix::Zero(4, 3));
    for (const auto& dw : g.dW) CHECK(dw.norm() == 0.0);
    for (const auto& db : g.db) CHECK(db.norm() == 0.0);
}

TEST_CASE("backward: single linear layer MSE matches the closed form") {
    MlpModel m;
    LinearLayer l;
    Rng rng(12);
    l.W = random_batch(3, 5, 13);
    l.b = Vector::Random(3);
    m.layers.push_back(l);

    const int batch = 7;
    const Matrix X = random_batch(batch, 5, 14);
    const Matrix Y = random_batch(batch, 3, 15);

    ForwardCache cache;
    const Matrix pred = forward_batch(m, X, Mode::train, nullptr, &cache);
    const Matrix dPred = 2.0 / batch * (pred - Y);
    const Gradients g = backward(m, cache, dPred);

    // closed form: dW = 2/batch * sum_i (W x_i + b - y_i) x_i^T
    Matrix expect_dW = Matrix::Zero(3, 5);
    Vector expect_db = Vector::Zero(3);
    for (int i = 0; i < batch; ++i) {
        const Vector err = l.W * X.row(i).transpose() + l.b - Y.row(i).transpose();
        expect_dW += 2.0 / batch * err * X.row(i);
        expect_db += 2.0 / batch * err;
    }
    CHECK((g.dW[0] - expect_dW).norm() < 1e-12);
    CHECK((g.db[0] - expect_db).norm() < 1e-12);
}

TEST_CASE("backward: analytic gradients match central finite differences") {
    int passes = 0;
    for (std::uint64_t seed = 100; passes < 10; ++seed) {
        MlpModel m = random_3layer(seed, true);
        const Matrix X = random_batch(5, 6, seed + 7000);
        const Matrix Y = random_batch(5, 3, seed + 9000);

        ForwardCache cache;
        Rng rng(seed);
        const Matrix pred = forward_batch(m, X, Mode::train, &rng, &cache);
        // keep the check away from the PReLU kink and from mask noise
        if (min_preact_margin(cache) < 1e-3) continue;

        const Matrix dPred = 2.0 / X.rows() * (pred - Y);
        const Gradients analytic = backward(m, cache, dPred);

        const auto masks = cache.masks;
        const auto loss = [&](const MlpModel& model) {
            const Matrix out = forward_with_masks(model, X, masks);
            return (out - Y).rowwise().squaredNorm().mean();
        };
        const FdReport rep = fd_compare(m, analytic, loss);
        CHECK(rep.max_rel_err < 1e-4);
        ++passes;
    }
}

TEST_CASE("backward: stale cache is rejected") {
    const MlpModel m = random_3layer(20);
    ForwardCache cache; // never filled
    CHECK_THROWS_AS(backward(m, cache, Matrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("adagrad: first step moves by about -lr for unit gradient") {
    MlpModel m;
    LinearLayer l;
    l.W = Matrix::Zero(1, 1);
    l.b = Vector::Zero(1);
    m.layers.push_back(l);
    AdagradState st = AdagradState::for_model(m, 0.1);

    Gradients g = Gradients::zeros_like(m);
    g.dW[0](0, 0) = 1.0;
    adagrad_step(m, g, st);
    CHECK(m.layers[0].W(0, 0) == doctest::Approx(-0.1).epsilon(1e-8));

    // second unit-gradient step shrinks by 1/sqrt(2)
    adagrad_step(m, g, st);
    CHECK(m.layers[0].W(0, 0) == doctest::Approx(-0.1 - 0.1 / std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("adagrad: zero gradient leaves parameters unchanged") {
    MlpModel m = random_3layer(21);
    const MlpModel before = m;
    AdagradState st = AdagradState::for_model(m, 0.1);
    const Gradients g = Gradients::zeros_like(m);
    adagrad_step(m, g, st);
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK((m.layers[i].W - before.layers[i].W).norm() == 0.0);
        CHECK((m.layers[i].b - before.layers[i].b).norm() == 0.0);
        CHECK(m.layers[i].prelu_slope == before.layers[i].prelu_slope);
    }
}

TEST_CASE("model io: save/load round trip is exact at serialized precision") {
    TempDir dir("model_io");
    MlpModel m = random_3layer(30, true);
    m.input_scale = 0.05;
    m.aux_hint = 123;
    const auto path = dir.path / "m.bin";
    save_model(m, path);

    const MlpModel m2 = load_model(path);
    CHECK(m2.dropout_p == doctest::Approx(0.5));
    CHECK(m2.input_scale == doctest::Approx(0.05));
    CHECK(m2.aux_hint == 123);
    REQUIRE(m2.layers.size() == m.layers.size());
    // parameters survive up to the f32 on-disk precision...
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK((m.layers[i].W - m2.layers[i].W).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(m2.layers[i].has_prelu == m.layers[i].has_prelu);
        CHECK(m2.layers[i].has_dropout == m.layers[i].has_dropout);
    }
    // ...and a second round trip is bit-exact, file bytes included
    save_model(m2, dir.path / "m2.bin");
    const MlpModel m3 = load_model(dir.path / "m2.bin");
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        CHECK(m2.layers[i].W == m3.layers[i].W);
        CHECK(m2.layers[i].b == m3.layers[i].b);
        CHECK(m2.layers[i].prelu_slope == m3.layers[i].prelu_slope);
    }
    save_model(m3, dir.path / "m3.bin");
    CHECK(read_text_file(dir.path / "m2.bin") == read_text_file(dir.path / "m3.bin"));
}

TEST_CASE("model io: truncated and wrong-version files are rejected") {
    TempDir dir("model_bad");
    const MlpModel m = random_3layer(31);
    const auto path = dir.path / "m.bin";
    save_model(m, path);

    // truncate
    const std::string bytes = read_text_file(path);
    write_text_file(bytes.substr(0, bytes.size() / 2), dir.path / "trunc.bin");
    CHECK_THROWS_WITH_AS(load_model(dir.path / "trunc.bin"),
                         doctest::Contains("truncated"), std::runtime_error);

    // wrong version magic
    std::string vbytes = bytes;
    vbytes[7] = '9';
    write_text_file(vbytes, dir.path / "vers.bin");
    CHECK_THROWS_WITH_AS(load_model(dir.path / "vers.bin"),
                         doctest::Contains("version"), std::runtime_error);

    // not a model file at all
    write_text_file("definitely not a model", dir.path / "junk.bin");
    CHECK_THROWS_AS(load_model(dir.path / "junk.bin"), std::runtime_error);
}

TEST_SUITE_END();
