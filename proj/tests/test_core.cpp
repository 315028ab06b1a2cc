#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nta/alarm.hpp"
#include "nta/flow.hpp"
#include "nta/io.hpp"
#include "nta/mat.hpp"
#include "nta/rng.hpp"
#include "nta/stats.hpp"
#include "nta/traffic.hpp"

using namespace nta;

namespace {

// Standard normal CDF through erf, used as the independent reference for the
// quantile function below.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bisection inverse of normal_cdf, accurate to ~1e-12. Slow but obviously
// correct, which is the point of an oracle.
double quantile_oracle(double p) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Mat random_symmetric(std::size_t n, Rng& rng) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = rng.uniform(-1.0, 1.0);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

double max_abs_diff(const Mat& x, const Mat& y) {
    REQUIRE(x.rows == y.rows);
    REQUIRE(x.cols == y.cols);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i)
        worst = std::max(worst, std::abs(x.a[i] - y.a[i]));
    return worst;
}

}  // namespace

TEST_CASE("mat: basic algebra") {
    Mat a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;

    Mat at = transpose(a);
    CHECK(at.rows == 3);
    CHECK(at.cols == 2);
    CHECK(at(2, 1) == 6);

    Mat prod = matmul(a, at);  // 2x2 Gram matrix
    CHECK(prod(0, 0) == doctest::Approx(14.0));
    CHECK(prod(0, 1) == doctest::Approx(32.0));
    CHECK(prod(1, 1) == doctest::Approx(77.0));

    Vec v = matvec(a, {1.0, 1.0, 1.0});
    CHECK(v[0] == doctest::Approx(6.0));
    CHECK(v[1] == doctest::Approx(15.0));

    CHECK(dot({1.0, 2.0}, {3.0, 4.0}) == doctest::Approx(11.0));
    CHECK(norm2({3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(norm2sq({3.0, 4.0}) == doctest::Approx(25.0));

    Mat eye = identity(3);
    CHECK(max_abs_diff(matmul(eye, at), at) == doctest::Approx(0.0));
}

TEST_CASE("mat: solve_linear on a hand system") {
    // 2x + y = 5, x + 3y = 10 has the unique solution x = 1, y = 3.
    Mat a(2, 2);
    a(0, 0) = 2; a(0, 1) = 1;
    a(1, 0) = 1; a(1, 1) = 3;
    Mat b(2, 1);
    b(0, 0) = 5;
    b(1, 0) = 10;
    Mat x = solve_linear(a, b);
    CHECK(x(0, 0) == doctest::Approx(1.0));
    CHECK(x(1, 0) == doctest::Approx(3.0));

    Mat inv = inverse(a);
    CHECK(max_abs_diff(matmul(a, inv), identity(2)) < 1e-12);

    Mat singular(2, 2);
    singular(0, 0) = 1; singular(0, 1) = 1;
    singular(1, 0) = 1; singular(1, 1) = 1;
    CHECK_THROWS_AS(solve_linear(singular, b), std::runtime_error);
    // The jittered fallback must return something finite for the same system.
    Mat xr = solve_regularized(singular, b);
    CHECK(std::isfinite(xr(0, 0)));
    CHECK(std::isfinite(xr(1, 0)));
}

TEST_CASE("mat: sym_eigen identity and diagonal") {
    EigenResult eye = sym_eigen(identity(3));
    REQUIRE(eye.values.size() == 3);
    for (double v : eye.values) CHECK(v == doctest::Approx(1.0));

    Mat d(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 1;
    EigenResult eig = sym_eigen(d);
    CHECK(eig.values[0] == doctest::Approx(2.0));
    CHECK(eig.values[1] == doctest::Approx(1.0));
    // Leading eigenvector is the first axis up to sign.
    CHECK(std::abs(eig.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(eig.vectors(1, 0)) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("mat: sym_eigen reconstruction, trace and orthonormality") {
    Rng rng(42);
    Mat m = random_symmetric(5, rng);
    EigenResult eig = sym_eigen(m);

    // Eigenvalues sorted descending.
    for (std::size_t i = 1; i < eig.values.size(); ++i)
        CHECK(eig.values[i - 1] >= eig.values[i] - 1e-12);

    // V Lambda V^T reproduces the input.
    Mat lambda(5, 5);
    for (std::size_t i = 0; i < 5; ++i) lambda(i, i) = eig.values[i];
    Mat recon = matmul(matmul(eig.vectors, lambda), transpose(eig.vectors));
    CHECK(max_abs_diff(recon, m) < 1e-8);

    // Trace identity and V^T V = I.
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        trace += m(i, i);
        sum += eig.values[i];
    }
    CHECK(sum == doctest::Approx(trace).epsilon(1e-8));
    CHECK(max_abs_diff(matmul(transpose(eig.vectors), eig.vectors), identity(5)) < 1e-8);

    Mat asym(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(sym_eigen(asym), std::invalid_argument);
}

TEST_CASE("stats: normal quantile against a bisection oracle") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.644854).epsilon(1e-5));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    for (double p : {0.01, 0.1, 0.3, 0.6, 0.9, 0.99, 0.999})
        CHECK(normal_quantile(p) == doctest::Approx(quantile_oracle(p)).epsilon(1e-6));

    // Strictly increasing and antisymmetric about one half.
    double prev = normal_quantile(0.001);
    for (double p = 0.05; p < 1.0; p += 0.05) {
        double q = normal_quantile(p);
        CHECK(q > prev);
        prev = q;
        CHECK(q == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-9));
    }

    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("stats: moments and robust statistics") {
    std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    CHECK(mean(v) == doctest::Approx(2.5));
    CHECK(variance_pop(v) == doctest::Approx(1.25));
    CHECK(variance_sample(v) == doctest::Approx(5.0 / 3.0));
    CHECK(median(v) == doctest::Approx(2.5));
    CHECK(median({5.0, 1.0, 3.0}) == doctest::Approx(3.0));
    // MAD of {1,2,3,4}: deviations from 2.5 are {1.5,0.5,0.5,1.5}, median 1.
    CHECK(mad(v) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mean({}), std::invalid_argument);
    CHECK_THROWS_AS(variance_sample({1.0}), std::invalid_argument);
}

TEST_CASE("rng: determinism and distribution sanity") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());

    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);

    // Loose moment checks on 20k draws; these are sanity bounds, not
    // statistical tests.
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.05));

    double psum = 0.0;
    for (int i = 0; i < n; ++i) psum += static_cast<double>(rng.poisson(3.0));
    CHECK(psum / n == doctest::Approx(3.0).epsilon(0.05));

    double gsum = 0.0;
    for (int i = 0; i < n; ++i) gsum += rng.gamma(3.0, 2.0);
    CHECK(gsum / n == doctest::Approx(6.0).epsilon(0.05));

    CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
    CHECK_THROWS_AS(rng.gamma(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("flow: csv parsing") {
    SUBCASE("single record maps fields directly") {
        std::istringstream in(
            "t,sip,dip,sp,dp,proto,packets,bytes\n"
            "0,10.0.0.1,10.0.0.2,1234,80,6,2,96\n");
        auto records = parse_flow_records(in);
        REQUIRE(records.size() == 1);
        CHECK(records[0].t == doctest::Approx(0.0));
        CHECK(records[0].sip == parse_ipv4("10.0.0.1"));
        CHECK(records[0].dip == parse_ipv4("10.0.0.2"));
        CHECK(records[0].sp == 1234);
        CHECK(records[0].dp == 80);
        CHECK(records[0].proto == 6);
        CHECK(records[0].packets == 2);
        CHECK(records[0].bytes == 96);
    }
    SUBCASE("empty body gives an empty list") {
        std::istringstream in("t,sip,dip,sp,dp,proto,packets,bytes\n");
        CHECK(parse_flow_records(in).empty());
    }
    SUBCASE("short line reports its line number") {
        std::istringstream in(
            "t,sip,dip,sp,dp,proto,packets,bytes\n"
            "0,10.0.0.1,10.0.0.2,1234,80,6,2\n");
        CHECK_THROWS_WITH_AS(parse_flow_records(in), doctest::Contains("line 2"),
                             std::runtime_error);
    }
    SUBCASE("round trip through the writer") {
        std::vector<FlowRecord> records(2);
        records[0].t = 1.5;
        records[0].sip = parse_ipv4("192.168.77.5");
        records[0].dip = parse_ipv4("172.16.9.9");
        records[0].sp = 4444;
        records[0].dp = 53;
        records[0].proto = 17;
        records[0].packets = 3;
        records[0].bytes = 300;
        records[1].t = 2.0;
        records[1].sip = parse_ipv4("1.2.3.4");
        records[1].dip = parse_ipv4("5.6.7.8");
        std::ostringstream out;
        write_flow_records(out, records);
        std::istringstream in(out.str());
        auto back = parse_flow_records(in);
        REQUIRE(back.size() == 2);
        CHECK(back[0].sip == records[0].sip);
        CHECK(back[0].bytes == 300);
        CHECK(back[1].dip == records[1].dip);
    }
}

TEST_CASE("flow: ipv4 conversions") {
    CHECK(parse_ipv4("0.0.0.0") == 0u);
    CHECK(parse_ipv4("255.255.255.255") == 0xFFFFFFFFu);
    CHECK(parse_ipv4("10.0.0.1") == 0x0A000001u);
    CHECK(format_ipv4(0x0A000001u) == "10.0.0.1");
    CHECK(format_ipv4(parse_ipv4("203.0.113.42")) == "203.0.113.42");
    CHECK_THROWS_AS(parse_ipv4("10.0.0"), std::runtime_error);
    CHECK_THROWS_AS(parse_ipv4("10.0.0.256"), std::runtime_error);
    CHECK_THROWS_AS(parse_ipv4("10.0.0.1.2"), std::runtime_error);
}

TEST_CASE("traffic: bin_traffic aggregation") {
    auto rec = [](double t, const char* dip, std::uint64_t bytes) {
        FlowRecord r;
        r.t = t;
        r.dip = parse_ipv4(dip);
        r.bytes = bytes;
        return r;
    };

    SUBCASE("same key and bin adds up") {
        std::vector<FlowRecord> records = {rec(1.0, "10.0.0.1", 10), rec(2.0, "10.0.0.1", 20)};
        TrafficMatrix tm = bin_traffic(records, 10.0, key_by(Feature::DIP));
        REQUIRE(tm.values.rows == 1);
        REQUIRE(tm.values.cols == 1);
        CHECK(tm.values(0, 0) == doctest::Approx(30.0));
    }
    SUBCASE("record at t=5 with width 10 lands in bin 0") {
        std::vector<FlowRecord> records = {rec(5.0, "10.0.0.1", 7)};
        TrafficMatrix tm = bin_traffic(records, 10.0, key_by(Feature::DIP));
        CHECK(tm.values.rows == 1);
        CHECK(tm.values(0, 0) == doctest::Approx(7.0));
    }
    SUBCASE("three bins, two keys match a brute-force sum") {
        std::vector<FlowRecord> records = {
            rec(0.0, "10.0.0.1", 1),  rec(4.0, "10.0.0.2", 2),  rec(11.0, "10.0.0.1", 4),
            rec(19.0, "10.0.0.2", 8), rec(25.0, "10.0.0.1", 16), rec(25.5, "10.0.0.1", 32),
        };
        TrafficMatrix tm = bin_traffic(records, 10.0, key_by(Feature::DIP));
        REQUIRE(tm.values.rows == 3);
        REQUIRE(tm.values.cols == 2);

        // Exhaustive reference: bin by arithmetic, sum per (bin, key string).
        std::map<std::pair<std::size_t, std::string>, double> expect;
        for (const auto& r : records) {
            auto bin = static_cast<std::size_t>((r.t - tm.t0) / tm.bin_width);
            expect[{bin, format_ipv4(r.dip)}] += static_cast<double>(r.bytes);
        }
        for (std::size_t i = 0; i < tm.values.rows; ++i)
            for (std::size_t j = 0; j < tm.values.cols; ++j) {
                auto it = expect.find({i, tm.series_ids[j]});
                double want = it == expect.end() ? 0.0 : it->second;
                CHECK(tm.values(i, j) == doctest::Approx(want));
            }

        // Permutation invariance in record order.
        std::vector<FlowRecord> shuffled = {records[3], records[0], records[5],
                                            records[2], records[4], records[1]};
        TrafficMatrix tm2 = bin_traffic(shuffled, 10.0, key_by(Feature::DIP));
        CHECK(max_abs_diff(tm.values, tm2.values) == doctest::Approx(0.0));
    }
    SUBCASE("packet volume switch") {
        std::vector<FlowRecord> records = {rec(0.0, "10.0.0.1", 100)};
        records[0].packets = 9;
        TrafficMatrix tm = bin_traffic(records, 10.0, key_by(Feature::DIP), Volume::Packets);
        CHECK(tm.values(0, 0) == doctest::Approx(9.0));
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(bin_traffic({}, 10.0, key_by(Feature::DIP)), std::invalid_argument);
    }
}

TEST_CASE("flow: feature_histogram counts packets") {
    std::vector<FlowRecord> records(3);
    for (std::size_t i = 0; i < 3; ++i) {
        records[i].t = static_cast<double>(i);
        records[i].dp = 80;
        records[i].packets = i + 1;
    }
    SUBCASE("single value accumulates packet counts") {
        Histogram h = feature_histogram(records, Feature::DP, 10.0, 0.0, 0);
        REQUIRE(h.counts.size() == 1);
        CHECK(h.counts.at(80) == 6);
        CHECK(h.total() == 6);
    }
    SUBCASE("disjoint values get one entry each") {
        records[1].dp = 443;
        records[2].dp = 53;
        Histogram h = feature_histogram(records, Feature::DP, 10.0, 0.0, 0);
        CHECK(h.counts.size() == 3);
        CHECK(h.counts.at(443) == 2);
    }
    SUBCASE("mixed corpus matches an exhaustive count") {
        Rng rng(3);
        std::vector<FlowRecord> corpus(200);
        for (auto& r : corpus) {
            r.t = rng.uniform(0.0, 30.0);
            r.dp = static_cast<std::uint16_t>(rng.below(5) * 100);
            r.packets = rng.below(4) + 1;
        }
        Histogram h = feature_histogram(corpus, Feature::DP, 10.0, 0.0, 1);
        std::map<std::uint64_t, std::uint64_t> expect;
        for (const auto& r : corpus)
            if (r.t >= 10.0 && r.t < 20.0) expect[r.dp] += r.packets;
        CHECK(h.counts == expect);
    }
}

TEST_CASE("alarm: construction invariant and json shape") {
    Alarm a = make_alarm(3, "sketch", 5.0, 2.0, {"10.0.0.1"});
    CHECK(a.t_index == 3);
    CHECK(a.score >= a.threshold);
    CHECK_THROWS_AS(make_alarm(0, "sketch", 1.0, 2.0), std::logic_error);

    std::string json = alarm_to_json(a);
    CHECK(json.find("\"t_index\":3") != std::string::npos);
    CHECK(json.find("\"detector\":\"sketch\"") != std::string::npos);
    CHECK(json.find("\"keys\":[\"10.0.0.1\"]") != std::string::npos);

    std::ostringstream out;
    write_alarms(out, {a, a});
    std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("io: link csv and routing matrix round trips") {
    TrafficMatrix tm;
    tm.bin_width = 10.0;
    tm.t0 = 100.0;
    tm.series_ids = {"a", "b"};
    tm.values = Mat(2, 2);
    tm.values(0, 0) = 1.5;
    tm.values(0, 1) = 2.0;
    tm.values(1, 0) = 0.0;
    tm.values(1, 1) = 4.25;

    std::ostringstream out;
    write_link_csv(out, tm);
    std::istringstream in(out.str());
    TrafficMatrix back = parse_link_csv(in);
    REQUIRE(back.values.rows == 2);
    REQUIRE(back.values.cols == 2);
    CHECK(back.series_ids == tm.series_ids);
    CHECK(max_abs_diff(back.values, tm.values) == doctest::Approx(0.0));

    Mat routing(2, 3);
    routing(0, 0) = 1.0;
    routing(1, 2) = 0.5;
    std::ostringstream rout;
    write_routing_matrix(rout, routing);
    std::istringstream rin(rout.str());
    Mat rback = parse_routing_matrix(rin);
    CHECK(max_abs_diff(rback, routing) == doctest::Approx(0.0));

    // format_double round-trips exactly.
    for (double v : {0.1, 1.0 / 3.0, 12345.6789, -2.5e-9}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}
