#include <shortblock/sim.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

using namespace shortblock;

namespace {

SimConfig small_config()
{
    SimConfig c;
    c.payload_bits = 4;
    c.channel.n_rx = 2;
    c.receivers = {ReceiverKind::Noncoherent, ReceiverKind::FullEc, ReceiverKind::QuasiCoherent};
    c.snr = {0.0, 6.0, 2.0};
    c.trials = 3000;
    c.seed = 17;
    c.threads = 1;
    return c;
}

SimConfig block_config()
{
    SimConfig c;
    c.payload_bits = 11;
    c.frame.prbs = 3;
    c.channel.n_rx = 2;
    c.receivers = {ReceiverKind::QuasiCoherent, ReceiverKind::FhtBlock, ReceiverKind::HtBlock};
    c.snr = {0.0, 4.0, 2.0};
    c.trials = 1500;
    c.threads = 1;
    return c;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("shortblock_" + name)).string();
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST(SnrGrid, Points)
{
    EXPECT_EQ((SnrGrid{0.0, 2.0, 0.5}.points()), (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
    EXPECT_EQ((SnrGrid{-1.0, -1.0, 1.0}.points()), (std::vector<double>{-1.0}));
    EXPECT_EQ((SnrGrid{0.0, 0.3, 0.1}.points()).size(), 4u);
}

TEST(SimConfig, Validation)
{
    auto c = small_config();
    c.trials = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.snr.step = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.receivers.clear();
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.payload_bits = 11; // 32 bits of E cannot carry the 48-bit block code
    c.receivers = {ReceiverKind::FhtBlock};
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(block_config().validate());
}

TEST(RunTrial, NoiselessAllSucceed)
{
    for (auto model : {ChannelModel::LosPhase, ChannelModel::TdlC}) {
        auto c = small_config();
        c.channel.model = model;
        Simulator sim(c);
        for (std::uint64_t n = 0; n < 200; ++n)
            for (bool ok : sim.run_trial_sigma2(0.0, n).success)
                ASSERT_TRUE(ok);
        auto b = block_config();
        b.channel.model = model;
        Simulator bsim(b);
        for (std::uint64_t n = 0; n < 200; ++n)
            for (bool ok : bsim.run_trial_sigma2(0.0, n).success)
                ASSERT_TRUE(ok);
    }
}

TEST(RunTrial, Deterministic)
{
    const auto c = small_config();
    for (std::uint64_t n = 0; n < 50; ++n) {
        const auto a = run_trial(c, 1.0, n);
        const auto b = run_trial(c, 1.0, n);
        EXPECT_EQ(a.message, b.message);
        EXPECT_EQ(a.success, b.success);
    }
}

TEST(RunTrial, FullEcPairsWithNoncoherent)
{
    Simulator sim(small_config());
    int errors = 0;
    for (std::uint64_t n = 0; n < 5000; ++n) {
        const auto t = sim.run_trial(-2.0, n);
        ASSERT_EQ(t.success[0], t.success[1]);
        errors += !t.success[0];
    }
    EXPECT_GT(errors, 0);
}

TEST(RunTrial, BlockReceiversDecisionIdentical)
{
    Simulator sim(block_config());
    for (std::uint64_t n = 0; n < 3000; ++n) {
        const auto t = sim.run_trial(0.0, n);
        ASSERT_EQ(t.success[1], t.success[2]);
    }
}

TEST(RunTrial, MessagesUniform)
{
    Simulator sim(small_config());
    std::vector<int> counts(16, 0);
    for (std::uint64_t n = 0; n < 16000; ++n)
        ++counts[sim.run_trial(10.0, n).message];
    double chi2 = 0.0;
    for (int c : counts)
        chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
    EXPECT_LT(chi2, 30.58);
}

TEST(Wilson, KnownValuesAndBounds)
{
    const auto ci = wilson_interval(10, 100);
    EXPECT_NEAR(ci.lo, 0.05522, 1e-4);
    EXPECT_NEAR(ci.hi, 0.17437, 1e-4);
    const auto zero = wilson_interval(0, 1000);
    EXPECT_EQ(zero.lo, 0.0);
    EXPECT_GT(zero.hi, 0.0);
    EXPECT_EQ(wilson_interval(0, 0).hi, 1.0);
}

TEST(Wilson, CoverageOnRiggedChannel)
{
    // Bernoulli trials with known error probability; count how often the
    // interval contains the truth.
    Rng rng(21);
    for (double p : {0.01, 0.1, 0.3}) {
        std::bernoulli_distribution err(p);
        int covered = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            std::uint64_t e = 0;
            const std::uint64_t n = 2000;
            for (std::uint64_t k = 0; k < n; ++k)
                e += err(rng);
            const auto ci = wilson_interval(e, n);
            covered += (ci.lo <= p && p <= ci.hi);
        }
        EXPECT_GE(covered, 930) << "p=" << p;
        EXPECT_LE(covered, 970) << "p=" << p;
    }
}

TEST(Sweep, RowsSortedAndConsistent)
{
    const auto t = run_bler_sweep(small_config());
    ASSERT_EQ(t.rows.size(), 4u * 3);
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        const auto& a = t.rows[i];
        const auto& b = t.rows[i + 1];
        EXPECT_TRUE(a.receiver < b.receiver || (a.receiver == b.receiver && a.snr_db < b.snr_db));
    }
    for (const auto& r : t.rows) {
        EXPECT_EQ(r.trials, 3000u);
        EXPECT_DOUBLE_EQ(r.bler, static_cast<double>(r.errors) / r.trials);
        EXPECT_GE(r.bler, 0.0);
        EXPECT_LE(r.bler, 1.0);
    }
}

TEST(Sweep, MonotoneAndQuasiCoherentNotBetter)
{
    auto c = small_config();
    c.snr = {-4.0, 6.0, 2.0};
    c.trials = 4000;
    const auto t = run_bler_sweep(c);
    for (const auto& name : {"noncoherent", "quasi-coherent"}) {
        const auto curve = t.curve(name);
        for (std::size_t k = 0; k + 1 < curve.size(); ++k)
            EXPECT_LE(curve[k + 1].bler, curve[k].bler + curve[k].ci95 + curve[k + 1].ci95);
    }
    const auto nc = t.curve("noncoherent"), qc = t.curve("quasi-coherent");
    for (std::size_t k = 0; k < nc.size(); ++k)
        EXPECT_GE(qc[k].bler + qc[k].ci95 + nc[k].ci95, nc[k].bler);
}

TEST(Sweep, NoiselessSingleTrial)
{
    auto c = small_config();
    c.trials = 1;
    c.snr = {200.0, 210.0, 5.0};
    for (const auto& r : run_bler_sweep(c).rows)
        EXPECT_EQ(r.bler, 0.0);
}

TEST(Sweep, IndependentOfThreadCountAndBatching)
{
    auto c = small_config();
    c.trials = 2500;
    const auto one = to_csv(run_bler_sweep(c, {500, 2}));
    c.threads = 3;
    EXPECT_EQ(to_csv(run_bler_sweep(c, {500, 2})), one);
    c.threads = 4;
    EXPECT_EQ(to_csv(run_bler_sweep(c, {500, 3})), one);
}

TEST(Sweep, EarlyStopFloor)
{
    auto c = small_config();
    c.snr = {-6.0, -6.0, 1.0};
    c.trials = 20000;
    c.error_target = 5; // raised to the 50-error floor
    const auto t = run_bler_sweep(c, {100, 4});
    for (const auto& r : t.rows) {
        EXPECT_LT(r.trials, 20000u);
        EXPECT_EQ(r.trials % 100, 0u);
    }
    std::uint64_t min_errors = ~0ull;
    for (const auto& r : t.rows)
        min_errors = std::min(min_errors, r.errors);
    EXPECT_GE(min_errors, SimConfig::kMinErrorsForEarlyStop);

    // The stopped point equals the prefix of a full run.
    auto full = c;
    full.error_target = 0;
    full.trials = t.rows.front().trials;
    const auto ref = run_bler_sweep(full, {100, 4});
    EXPECT_EQ(to_csv(ref), to_csv(t));
}

TEST(Gap, InterpolationExample)
{
    BlerTable t;
    t.rows = {make_row(0.0, "a", 100000, 2000), make_row(1.0, "a", 100000, 500)};
    const auto x = snr_at_bler(t.curve("a"), 0.01);
    ASSERT_TRUE(x);
    EXPECT_NEAR(*x, 0.5, 1e-12);
}

TEST(Gap, IdenticalCurvesAndSign)
{
    BlerTable t;
    for (double s : {0.0, 1.0, 2.0}) {
        const std::uint64_t e = static_cast<std::uint64_t>(1000 * std::pow(10.0, -s));
        t.rows.push_back(make_row(s, "a", 10000, e));
        t.rows.push_back(make_row(s, "b", 10000, e));
        t.rows.push_back(make_row(s + 0.5, "c", 10000, e));
    }
    EXPECT_EQ(estimate_gap_at_bler(t, "a", "b", 0.01).gap_db, 0.0);
    const auto g = estimate_gap_at_bler(t, "c", "a", 0.01);
    EXPECT_NEAR(g.gap_db, 0.5, 1e-12);
    EXPECT_NEAR(g.snr_a_db - g.snr_b_db, g.gap_db, 1e-15);
}

TEST(Gap, UnbracketedTargetNamesReceiver)
{
    BlerTable t;
    t.rows = {make_row(0.0, "good", 1000, 100), make_row(1.0, "good", 1000, 1),
              make_row(0.0, "bad", 1000, 500), make_row(1.0, "bad", 1000, 400)};
    try {
        estimate_gap_at_bler(t, "good", "bad", 0.01);
        FAIL() << "expected RangeError";
    } catch (const RangeError& e) {
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
        EXPECT_EQ(std::string(e.what()).find("good"), std::string::npos);
    }
    EXPECT_THROW(estimate_gap_at_bler(t, "good", "bad", 1.5), RangeError);
    // A zero-error point after the crossing cannot be interpolated in log scale.
    BlerTable z;
    z.rows = {make_row(0.0, "a", 1000, 100), make_row(1.0, "a", 1000, 0)};
    EXPECT_FALSE(snr_at_bler(z.curve("a"), 0.01));
}

TEST(Csv, HeaderRowsAndRoundTrip)
{
    BlerTable empty;
    EXPECT_EQ(to_csv(empty), "snr_db,receiver,trials,errors,bler,ci95\n");

    BlerTable t;
    t.rows = {make_row(-0.5, "noncoherent", 1000, 7), make_row(0.1, "noncoherent", 1000, 3)};
    const auto text = to_csv(t);
    EXPECT_EQ(text.substr(0, text.find('\n')), kBlerCsvHeader);
    EXPECT_NE(text.find("\n-0.5,noncoherent,1000,7,0.007,"), std::string::npos);
    EXPECT_EQ(parse_bler_csv(text).rows, t.rows);

    GapReport g{"quasi-coherent", "noncoherent", 0.01, 1.25, 0.5, 0.75};
    EXPECT_EQ(to_csv(std::vector<GapReport>{g}),
              "pair,target_bler,snr_a_db,snr_b_db,gap_db\nquasi-coherent/noncoherent,0.01,1.25,0.5,0.75\n");
}

TEST(Csv, FilesAreByteIdentical)
{
    const auto t = run_bler_sweep(small_config());
    const auto p1 = temp_path("a.csv"), p2 = temp_path("b.csv");
    emit_csv(t, p1);
    emit_csv(t, p2);
    EXPECT_EQ(slurp(p1), slurp(p2));
    EXPECT_EQ(read_bler_csv(p1).rows, t.rows);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST(Csv, IoErrorsNamePath)
{
    try {
        emit_csv(BlerTable{}, "/nonexistent-dir/x.csv");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
    }
    EXPECT_THROW(read_bler_csv("/nonexistent-dir/x.csv"), IoError);
    EXPECT_THROW(parse_bler_csv("snr,receiver\n"), IoError);
    EXPECT_THROW(parse_bler_csv("snr_db,receiver,trials,errors,bler,ci95\n1,a,x,1,0,0\n"), IoError);
}
