// Network topology, budgets, and random channel generation.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace softran {

using cvec = Eigen::VectorXcd;

/// Raised for any invalid scenario configuration; `field()` names the culprit.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Address of one (InP, BS, subcarrier, user) slot.
struct Entry {
    int inp = 0;
    int bs = 0;
    int sub = 0;
    int user = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Tensor extents shared by channels and allocations. BS and subcarrier
/// counts are uniform across InPs.
struct Dims {
    int inps = 0;
    int bs = 0;
    int subs = 0;
    int users = 0;
    int antennas = 1;

    std::size_t entries() const noexcept {
        return static_cast<std::size_t>(inps) * bs * subs * users;
    }
    std::size_t at(int i, int b, int n, int k) const noexcept {
        return ((static_cast<std::size_t>(i) * bs + b) * subs + n) * users + k;
    }
    std::size_t at(const Entry& e) const noexcept { return at(e.inp, e.bs, e.sub, e.user); }
    Entry entry(std::size_t flat) const noexcept {
        Entry e;
        e.user = static_cast<int>(flat % users);
        flat /= users;
        e.sub = static_cast<int>(flat % subs);
        flat /= subs;
        e.bs = static_cast<int>(flat % bs);
        e.inp = static_cast<int>(flat / bs);
        return e;
    }
    friend bool operator==(const Dims&, const Dims&) = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Planar placement of every BS (flat over InP, BS) and user.
struct Layout {
    std::vector<Point> bs;
    std::vector<Point> users;
    friend bool operator==(const Layout&, const Layout&) = default;
};

struct ScenarioConfig {
    int inps = 2;
    int mvnos = 2;
    int bs_per_inp = 6;
    int subcarriers = 32;
    double subcarrier_bw_hz = 312.5e3;
    int users = 20;
    std::vector<int> users_per_mvno;  // empty: near-even contiguous split
    int antennas = 5;
    int noma_cap = 2;
    double p_max_mbs_w = 5.0;
    double p_max_fbs_w = 0.5;
    double p_max_mvno_w = 4.0;
    std::vector<double> r_min_bps_hz{2.0, 3.0};
    double noise_psd_dbm_hz = -174.0;
    double radius_m = 1000.0;
    double pathloss_exp = 2.0;
    double channel_mean = 0.2;
    double min_distance_m = 1.0;
    std::uint64_t seed = 1;
};

inline void validate(const ScenarioConfig& c) {
    auto positive = [](const char* f, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(f, "must be positive and finite");
    };
    if (c.inps < 1) throw ConfigError("inps", "must be at least 1");
    if (c.mvnos < 1) throw ConfigError("mvnos", "must be at least 1");
    if (c.bs_per_inp < 1) throw ConfigError("bs_per_inp", "must be at least 1");
    if (c.subcarriers < 1) throw ConfigError("subcarriers", "must be at least 1");
    if (c.users < 0) throw ConfigError("users", "must be non-negative");
    if (c.antennas < 1) throw ConfigError("antennas", "must be at least 1");
    if (c.noma_cap < 1) throw ConfigError("noma_cap", "must be at least 1");
    positive("subcarrier_bw_hz", c.subcarrier_bw_hz);
    positive("p_max_mbs_w", c.p_max_mbs_w);
    positive("p_max_fbs_w", c.p_max_fbs_w);
    positive("p_max_mvno_w", c.p_max_mvno_w);
    positive("radius_m", c.radius_m);
    positive("channel_mean", c.channel_mean);
    positive("min_distance_m", c.min_distance_m);
    if (!std::isfinite(c.noise_psd_dbm_hz)) throw ConfigError("noise_psd_dbm_hz", "must be finite");
    if (!(c.pathloss_exp >= 0.0)) throw ConfigError("pathloss_exp", "must be non-negative");
    if (c.r_min_bps_hz.size() != static_cast<std::size_t>(c.mvnos))
        throw ConfigError("r_min_bps_hz", "needs one entry per MVNO");
    for (double r : c.r_min_bps_hz)
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r_min_bps_hz", "entries must be non-negative");
    if (!c.users_per_mvno.empty()) {
        if (c.users_per_mvno.size() != static_cast<std::size_t>(c.mvnos))
            throw ConfigError("users_per_mvno", "needs one entry per MVNO");
        if (std::any_of(c.users_per_mvno.begin(), c.users_per_mvno.end(), [](int u) { return u < 0; }))
            throw ConfigError("users_per_mvno", "entries must be non-negative");
        if (std::accumulate(c.users_per_mvno.begin(), c.users_per_mvno.end(), 0) != c.users)
            throw ConfigError("users_per_mvno", "must sum to users");
    }
}

/// Reads a scenario from JSON; absent keys keep their defaults, unknown keys are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
    static const char* known[] = {"inps", "mvnos", "bs_per_inp", "subcarriers", "subcarrier_bw_hz", "users",
                                  "users_per_mvno", "antennas", "noma_cap", "p_max_mbs_w", "p_max_fbs_w",
                                  "p_max_mvno_w", "r_min_bps_hz", "noise_psd_dbm_hz", "radius_m",
                                  "pathloss_exp", "channel_mean", "min_distance_m", "seed"};
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known))
            throw ConfigError(key, "unknown key");

    ScenarioConfig c;
    auto get = [&](const char* key, auto& dst) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(dst);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key, e.what());
        }
    };
    get("inps", c.inps);
    get("mvnos", c.mvnos);
    get("bs_per_inp", c.bs_per_inp);
    get("subcarriers", c.subcarriers);
    get("subcarrier_bw_hz", c.subcarrier_bw_hz);
    get("users", c.users);
    get("users_per_mvno", c.users_per_mvno);
    get("antennas", c.antennas);
    get("noma_cap", c.noma_cap);
    get("p_max_mbs_w", c.p_max_mbs_w);
    get("p_max_fbs_w", c.p_max_fbs_w);
    get("p_max_mvno_w", c.p_max_mvno_w);
    get("r_min_bps_hz", c.r_min_bps_hz);
    get("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
    get("radius_m", c.radius_m);
    get("pathloss_exp", c.pathloss_exp);
    get("channel_mean", c.channel_mean);
    get("min_distance_m", c.min_distance_m);
    get("seed", c.seed);
    validate(c);
    return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
    return {{"inps", c.inps},
            {"mvnos", c.mvnos},
            {"bs_per_inp", c.bs_per_inp},
            {"subcarriers", c.subcarriers},
            {"subcarrier_bw_hz", c.subcarrier_bw_hz},
            {"users", c.users},
            {"users_per_mvno", c.users_per_mvno},
            {"antennas", c.antennas},
            {"noma_cap", c.noma_cap},
            {"p_max_mbs_w", c.p_max_mbs_w},
            {"p_max_fbs_w", c.p_max_fbs_w},
            {"p_max_mvno_w", c.p_max_mvno_w},
            {"r_min_bps_hz", c.r_min_bps_hz},
            {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
            {"radius_m", c.radius_m},
            {"pathloss_exp", c.pathloss_exp},
            {"channel_mean", c.channel_mean},
            {"min_distance_m", c.min_distance_m},
            {"seed", c.seed}};
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", e.what());
    }
    return config_from_json(j);
}

struct NetworkScenario {
    Dims dims;
    int num_mvnos = 0;
    int noma_cap = 1;
    double subcarrier_bw_hz = 0.0;
    std::vector<int> mvno_of_user;
    std::vector<double> p_max_bs;  // flat over (inp, bs)
    std::vector<double> p_max_mvno;
    std::vector<double> r_min_mvno;
    double noise_psd_dbm_hz = 0.0;
    double noise_w = 0.0;  // per subcarrier
    double radius_m = 0.0;
    double pathloss_exp = 0.0;
    double channel_mean = 0.0;
    double min_distance_m = 1.0;
    Layout layout;
    std::uint64_t seed = 0;

    int num_users() const noexcept { return dims.users; }
    int bs_index(int inp, int bs) const noexcept { return inp * dims.bs + bs; }
    double bs_budget(int inp, int bs) const { return p_max_bs[bs_index(inp, bs)]; }
    double r_min_of(int user) const { return r_min_mvno[mvno_of_user[user]]; }
    double mvno_budget_of(int user) const { return p_max_mvno[mvno_of_user[user]]; }
    /// Per-beam power cap implied by the BS and MVNO budgets.
    double beam_cap(int inp, int bs, int user) const { return std::min(bs_budget(inp, bs), mvno_budget_of(user)); }
    friend bool operator==(const NetworkScenario&, const NetworkScenario&) = default;
};

namespace detail {
inline Point uniform_in_disc(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double t = 2.0 * std::numbers::pi * u(rng);
    return {r * std::cos(t), r * std::sin(t)};
}
}  // namespace detail

inline NetworkScenario generate_scenario(const ScenarioConfig& c, std::uint64_t seed) {
    validate(c);
    NetworkScenario s;
    s.dims = {c.inps, c.bs_per_inp, c.subcarriers, c.users, c.antennas};
    s.num_mvnos = c.mvnos;
    s.noma_cap = c.noma_cap;
    s.subcarrier_bw_hz = c.subcarrier_bw_hz;
    s.noise_psd_dbm_hz = c.noise_psd_dbm_hz;
    s.noise_w = dbm_to_watt(c.noise_psd_dbm_hz) * c.subcarrier_bw_hz;
    s.radius_m = c.radius_m;
    s.pathloss_exp = c.pathloss_exp;
    s.channel_mean = c.channel_mean;
    s.min_distance_m = c.min_distance_m;
    s.p_max_mvno.assign(c.mvnos, c.p_max_mvno_w);
    s.r_min_mvno = c.r_min_bps_hz;
    s.seed = seed;

    s.p_max_bs.resize(static_cast<std::size_t>(c.inps) * c.bs_per_inp);
    for (int i = 0; i < c.inps; ++i)
        for (int b = 0; b < c.bs_per_inp; ++b) s.p_max_bs[s.bs_index(i, b)] = b == 0 ? c.p_max_mbs_w : c.p_max_fbs_w;

    std::vector<int> counts = c.users_per_mvno;
    if (counts.empty()) {
        counts.assign(c.mvnos, c.users / c.mvnos);
        for (int v = 0; v < c.users % c.mvnos; ++v) ++counts[v];
    }
    for (int v = 0; v < c.mvnos; ++v) s.mvno_of_user.insert(s.mvno_of_user.end(), counts[v], v);

    std::mt19937_64 rng(seed);
    for (std::size_t b = 0; b < s.p_max_bs.size(); ++b) s.layout.bs.push_back(detail::uniform_in_disc(rng, c.radius_m));
    for (int k = 0; k < c.users; ++k) s.layout.users.push_back(detail::uniform_in_disc(rng, c.radius_m));
    return s;
}

/// Channel tensor with per-(InP, subcarrier) SIC orders derived on construction.
class ChannelState {
public:
    ChannelState() = default;
    ChannelState(Dims dims, std::vector<cvec> h, Layout positions = {}, std::uint64_t seed = 0)
        : dims_(dims), h_(std::move(h)), positions_(std::move(positions)), seed_(seed) {
        if (h_.size() != dims_.entries()) throw std::invalid_argument("channel tensor size mismatch");
        for (const auto& v : h_)
            if (v.size() != dims_.antennas) throw std::invalid_argument("channel vector length mismatch");
        build_orders();
    }

    const Dims& dims() const noexcept { return dims_; }
    const cvec& h(int i, int b, int n, int k) const { return h_[dims_.at(i, b, n, k)]; }
    const cvec& h(const Entry& e) const { return h_[dims_.at(e)]; }
    const std::vector<cvec>& tensor() const noexcept { return h_; }
    const Layout& positions() const noexcept { return positions_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Users of (inp, sub), strongest first.
    const std::vector<int>& order(int inp, int sub) const { return order_[inp * dims_.subs + sub]; }
    /// Position in the order, 0 = strongest.
    int rank(int inp, int sub, int user) const { return rank_[(inp * dims_.subs + sub) * dims_.users + user]; }
    /// True when `a` sits above `b` in the SIC order (a decodes and cancels b).
    bool stronger(int inp, int sub, int a, int b) const { return rank(inp, sub, a) < rank(inp, sub, b); }
    double mean_gain(int inp, int sub, int user) const {
        double acc = 0.0;
        for (int b = 0; b < dims_.bs; ++b) acc += h(inp, b, sub, user).squaredNorm();
        return acc / dims_.bs;
    }

private:
    void build_orders() {
        order_.assign(static_cast<std::size_t>(dims_.inps) * dims_.subs, {});
        rank_.assign(static_cast<std::size_t>(dims_.inps) * dims_.subs * dims_.users, 0);
        for (int i = 0; i < dims_.inps; ++i)
            for (int n = 0; n < dims_.subs; ++n) {
                std::vector<double> g(dims_.users);
                for (int k = 0; k < dims_.users; ++k) g[k] = mean_gain(i, n, k);
                auto& ord = order_[i * dims_.subs + n];
                ord.resize(dims_.users);
                std::iota(ord.begin(), ord.end(), 0);
                std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return g[a] > g[b]; });
                for (int r = 0; r < dims_.users; ++r) rank_[(i * dims_.subs + n) * dims_.users + ord[r]] = r;
            }
    }

    Dims dims_;
    std::vector<cvec> h_;
    Layout positions_;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<int>> order_;
    std::vector<int> rank_;
};

inline ChannelState generate_channels(const NetworkScenario& s, std::uint64_t seed) {
    const Dims& d = s.dims;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gain(1.0 / s.channel_mean);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<cvec> h(d.entries(), cvec::Zero(d.antennas));
    for (int i = 0; i < d.inps; ++i)
        for (int b = 0; b < d.bs; ++b)
            for (int k = 0; k < d.users; ++k) {
                const double dist =
                    std::max(s.min_distance_m, distance(s.layout.bs[s.bs_index(i, b)], s.layout.users[k]));
                const double scale = std::pow(dist, -s.pathloss_exp / 2.0);
                for (int n = 0; n < d.subs; ++n) {
                    cvec& v = h[d.at(i, b, n, k)];
                    for (int m = 0; m < d.antennas; ++m) v[m] = std::polar(std::sqrt(gain(rng)) * scale, phase(rng));
                }
            }
    return ChannelState(d, std::move(h), s.layout, seed);
}

/// Descending mean channel gain over all BSs of the InP; ties by user index.
inline std::vector<int> sic_order(const ChannelState& ch, int inp, int sub) { return ch.order(inp, sub); }

}  // namespace softran
