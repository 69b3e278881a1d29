#include <shortblock/channel.hpp>

#include <gtest/gtest.h>

using namespace shortblock;

namespace {

ChannelConfig los(int n_rx = 1)
{
    ChannelConfig c;
    c.model = ChannelModel::LosPhase;
    c.n_rx = n_rx;
    return c;
}

ChannelConfig tdlc(int n_rx = 1, double ds = 300e-9)
{
    ChannelConfig c;
    c.model = ChannelModel::TdlC;
    c.n_rx = n_rx;
    c.delay_spread = ds;
    return c;
}

// |E[g_k conj(g_{k+1})]| / E[|g_k|^2] on adjacent subcarriers 0 and 1.
double adjacent_correlation(double ds, int draws)
{
    FrameConfig f;
    FrameLayout lay(f);
    TdlcGenerator gen(tdlc(1, ds), lay);
    Rng rng(5);
    cf cross{};
    double power = 0.0;
    for (int n = 0; n < draws; ++n) {
        const auto ch = gen.draw(rng);
        cross += ch.gains[0][0] * std::conj(ch.gains[0][1]);
        power += std::norm(ch.gains[0][0]);
    }
    return std::abs(cross) / power;
}

} // namespace

TEST(LosPhase, UnitModulusConstantGains)
{
    Rng rng(1);
    const auto ch = draw_los_phase(rng, los(4), 24);
    ASSERT_EQ(ch.n_rx(), 4u);
    for (const auto& g : ch.gains) {
        ASSERT_EQ(g.size(), 24u);
        for (const auto& v : g) {
            EXPECT_NEAR(std::abs(v), 1.0, 1e-15);
            EXPECT_EQ(v, g[0]);
        }
    }
}

TEST(LosPhase, CircularUniformAndIndependent)
{
    Rng rng(2);
    cf mean{}, cross{};
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const auto ch = draw_los_phase(rng, los(2), 1);
        mean += ch.gains[0][0];
        cross += ch.gains[0][0] * std::conj(ch.gains[1][0]);
    }
    EXPECT_LT(std::abs(mean) / n, 0.02);
    EXPECT_LT(std::abs(cross) / n, 0.02);
}

TEST(LosPhase, WrongModelRejected)
{
    Rng rng(1);
    EXPECT_THROW(draw_los_phase(rng, tdlc(), 24), ConfigError);
    EXPECT_THROW(TdlcGenerator(los(), FrameLayout(FrameConfig{})), ConfigError);
}

TEST(TdlProfile, EmbeddedMatchesDataFile)
{
    const auto file = TdlProfile::load(SHORTBLOCK_DATA_DIR "/tdl_c.txt");
    const auto& emb = tdlc_profile();
    ASSERT_EQ(emb.taps(), 24u);
    EXPECT_EQ(file.normalized_delays, emb.normalized_delays);
    EXPECT_EQ(file.powers_db, emb.powers_db);
}

TEST(TdlProfile, ParseErrors)
{
    EXPECT_THROW(TdlProfile::parse(""), ConfigError);
    EXPECT_THROW(TdlProfile::parse("# only a comment\n"), ConfigError);
    EXPECT_THROW(TdlProfile::parse("0 -1 2\n"), ConfigError);
    EXPECT_THROW(TdlProfile::parse("-1 0\n"), ConfigError);
    EXPECT_THROW(TdlProfile::load("/nonexistent/profile.txt"), ConfigError);
    EXPECT_EQ(TdlProfile::parse("0 0 # direct\n1.5 -3\n").taps(), 2u);
}

TEST(Tdlc, UnitAveragePower)
{
    FrameConfig f;
    FrameLayout lay(f);
    TdlcGenerator gen(tdlc(1), lay);
    Rng rng(3);
    const int n = 100000;
    double p0 = 0.0, p_all = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto ch = gen.draw(rng);
        p0 += std::norm(ch.gains[0][0]);
        for (const auto& g : ch.gains[0])
            p_all += std::norm(g);
    }
    EXPECT_NEAR(p0 / n, 1.0, 0.02);
    EXPECT_NEAR(p_all / (n * 24.0), 1.0, 0.02);
}

TEST(Tdlc, GaussianMarginal)
{
    FrameConfig f;
    FrameLayout lay(f);
    TdlcGenerator gen(tdlc(1), lay);
    Rng rng(4);
    const int n = 100000;
    std::vector<double> re(n);
    double mean = 0.0;
    for (int k = 0; k < n; ++k) {
        re[k] = gen.draw(rng).gains[0][5].real();
        mean += re[k];
    }
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : re) {
        const double d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    const double kurt = m4 / (m2 * m2);
    EXPECT_GE(kurt, 2.9);
    EXPECT_LE(kurt, 3.1);
}

TEST(Tdlc, FlatInZeroDelayLimit)
{
    FrameConfig f;
    FrameLayout lay(f);
    TdlcGenerator gen(tdlc(2, 1e-18), lay);
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const auto ch = gen.draw(rng);
        for (const auto& g : ch.gains)
            for (const auto& v : g)
                ASSERT_LT(std::abs(v - g[0]), 1e-6);
    }
}

TEST(Tdlc, FrequencyCorrelationFallsWithDelaySpread)
{
    const double short_ds = adjacent_correlation(30e-9, 20000);
    const double long_ds = adjacent_correlation(300e-9, 20000);
    EXPECT_GT(short_ds, long_ds);
    EXPECT_GT(short_ds, 0.99);
}

TEST(Tdlc, ConstantAcrossSymbolsIndependentAcrossAntennas)
{
    FrameConfig f;
    f.symbols = 2;
    FrameLayout lay(f);
    TdlcGenerator gen(tdlc(2), lay);
    Rng rng(7);
    cf cross{};
    double power = 0.0;
    for (int k = 0; k < 20000; ++k) {
        const auto ch = gen.draw(rng);
        for (std::size_t t = 0; t < 24; ++t)
            ASSERT_EQ(ch.gains[0][t], ch.gains[0][t + 24]);
        cross += ch.gains[0][3] * std::conj(ch.gains[1][3]);
        power += std::norm(ch.gains[0][3]);
    }
    EXPECT_LT(std::abs(cross) / power, 0.03);
}

TEST(Tdlc, DeterministicForSeed)
{
    FrameConfig f;
    FrameLayout lay(f);
    Rng a(42), b(42);
    const auto ca = draw_channel(a, tdlc(3), lay);
    const auto cb = draw_channel(b, tdlc(3), lay);
    EXPECT_EQ(ca.gains, cb.gains);
}

TEST(Tdlc, ConfigValidation)
{
    EXPECT_THROW(tdlc(0).validate(), ConfigError);
    EXPECT_THROW(tdlc(1, 0.0).validate(), ConfigError);
    EXPECT_NO_THROW(los(1).validate());
}

TEST(ApplyChannel, IdentityAndMagnitude)
{
    std::vector<cf> x{cf(1, 0), cf(0, -2), cf(0.5, 0.5)};
    ChannelRealization ch;
    ch.gains = {std::vector<cf>(3, cf(1, 0))};
    Rng rng(8);
    EXPECT_EQ(apply_channel(x, ch, rng)[0], x);

    ch.gains = {{cf(0.3, 0.4), cf(-1, 1), cf(2, 0)}};
    const auto y = apply_channel(x, ch, rng)[0];
    for (std::size_t t = 0; t < 3; ++t)
        EXPECT_NEAR(std::abs(y[t]), std::abs(ch.gains[0][t]) * std::abs(x[t]), 1e-12);
}

TEST(ApplyChannel, NoisePowerAndWhiteness)
{
    ChannelRealization ch;
    ch.gains = {std::vector<cf>(2, cf(1, 0))};
    ch.sigma2 = 0.7;
    const std::vector<cf> x(2);
    Rng rng(9);
    const int n = 100000;
    double p = 0.0;
    cf cross{};
    for (int k = 0; k < n; ++k) {
        const auto y = apply_channel(x, ch, rng)[0];
        p += std::norm(y[0]);
        cross += y[0] * std::conj(y[1]);
    }
    EXPECT_NEAR(p / n, 2 * 0.7, 0.02 * 1.4);
    EXPECT_LT(std::abs(cross) / n / 1.4, 0.02);
}

TEST(ApplyChannel, DimensionMismatch)
{
    ChannelRealization ch;
    ch.gains = {std::vector<cf>(4, cf(1, 0))};
    Rng rng(1);
    EXPECT_THROW(apply_channel(std::vector<cf>(3), ch, rng), DimensionError);
    EXPECT_THROW(apply_channel(std::vector<cf>(4), ch, draw_unit_noise(rng, 2, 4)), DimensionError);
}

TEST(SnrConvention, Examples)
{
    FrameConfig f;
    EXPECT_DOUBLE_EQ(snr_to_sigma2(0.0, f), 0.5);
    EXPECT_NEAR(snr_to_sigma2(3.0103, f), 0.25, 1e-5);
    f.beta = 1.75;
    EXPECT_DOUBLE_EQ(f.mean_symbol_energy(), (16 + 1.75 * 1.75 * 8) / 24.0);
    EXPECT_DOUBLE_EQ(snr_to_sigma2(0.0, f), f.mean_symbol_energy() / 2);
    f.normalize_power = true;
    EXPECT_DOUBLE_EQ(snr_to_sigma2(0.0, f), 0.5);
}
