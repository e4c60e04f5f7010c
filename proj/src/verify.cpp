#include "etmc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etmc/certify.hpp"
#include "etmc/errors.hpp"
#include "etmc/oracle.hpp"

namespace etmc::verify {

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

double uniform_in(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

ProbVector random_prob(std::size_t n, CounterRng& rng) {
    ProbVector p(n);
    double s = 0;
    for (double& x : p) s += (x = -std::log(1.0 - rng.uniform()));
    for (double& x : p) x /= s;
    return p;
}

struct Worst {
    double err = 0;
    std::string where;
    void update(double e, const std::string& w) {
        if (e > err || std::isnan(e)) {
            err = std::isnan(e) ? INFINITY : e;
            where = w;
        }
    }
};

// Checks all closed forms on one (model, params) pair.
void check_instance(const ChannelModel& model, const PlantParams& params, CounterRng& rng, int id, Worst& series,
                    Worst& full) {
    const Lookahead lk(model, params);
    const std::size_t n = model.n();
    const double rho = lk.rho_p1e();
    const double bs[] = {params.abar2(), params.a * params.abar, params.a2(), params.c2(), 1.0};
    const long D = 1 + static_cast<long>(rng.uniform() * 5);
    const ProbVector p = random_prob(n, rng);
    const ChannelState gamma{1 + static_cast<int>(rng.uniform() * static_cast<double>(n))};
    const long mu = D + static_cast<long>(rng.uniform() * 40);
    const std::string tag = "instance " + std::to_string(id) + " D=" + std::to_string(D);

    for (double b : bs) {
        const long W = oracle::truncation_index(D, std::abs(b) * rho, 1e-16);
        const Vector om = oracle::omega_sequence(model, D, oracle::start_vector(model, D, p), W);
        const Vector omt = oracle::omega_sequence(model, D, oracle::start_vector_tilde(model, D, gamma), W);
        std::ostringstream bt;
        bt << tag << " b=" << b;
        series.update(rel_err(lk.series_g(D, b, p), oracle::weighted_tail(om, D, D, b)), bt.str() + " g");
        series.update(rel_err(lk.series_f(D, b, p, mu), oracle::weighted_tail(om, D, mu, b)), bt.str() + " f");
        series.update(rel_err(lk.series_g_tilde(D, b, gamma), oracle::weighted_tail(omt, D, D, b)), bt.str() + " g~");
        series.update(rel_err(lk.series_f_tilde(D, b, gamma, mu), oracle::weighted_tail(omt, D, mu, b)),
                      bt.str() + " f~");
    }

    SensorInfo info;
    info.Rk = 0;
    info.k = 1 + static_cast<long>(rng.uniform() * 20);
    const double scale = std::sqrt(params.B);
    info.x_Rk = scale * uniform_in(rng, -100.0, 100.0);
    info.x = scale * uniform_in(rng, -30.0, 30.0);
    info.z = scale * uniform_in(rng, -5.0, 5.0);
    info.p = p;
    full.update(rel_err(lk.lookahead_G(info, D), oracle::lookahead_G(info, D, model, params)), tag + " G");
    const double xs = scale * uniform_in(rng, -100.0, 100.0);
    full.update(rel_err(lk.perf_eval_J(xs, gamma, D), oracle::perf_eval_J(xs, gamma, D, model, params)), tag + " J");
}

CheckResult summarize(const std::string& name, const Worst& w, double tol) {
    std::ostringstream d;
    d << "max relative error " << w.err;
    if (!w.where.empty()) d << " at " << w.where;
    return {name, w.err <= tol, d.str()};
}

}  // namespace

ChannelModel random_model(std::size_t n, CounterRng& rng) {
    std::vector<Vector> c0, c1;
    for (std::size_t j = 0; j < n; ++j) {
        c0.push_back(random_prob(n, rng));
        c1.push_back(random_prob(n, rng));
    }
    Vector e(n);
    for (double& x : e) x = rng.uniform();
    return ChannelModel::make(SquareMatrix::from_columns(c0), SquareMatrix::from_columns(c1), e);
}

std::vector<CheckResult> series_suite(const ChannelModel& model, const PlantParams& params, const SeriesOptions& opt) {
    const Lookahead probe(model, params);
    if (!probe.spectral_feasible()) {
        std::ostringstream d;
        d << "divergent series: a^2 rho(P1E) = " << params.a2() * probe.rho_p1e() << " >= 1";
        return {{"series feasibility", false, d.str()}};
    }
    CounterRng rng(opt.seed, 0);
    Worst series, full;
    check_instance(model, params, rng, 0, series, full);
    for (int i = 1; i <= opt.instances;) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 5);
        ChannelModel m = random_model(n, rng);
        const double rho = spectral_radius(m.p1e());
        const double a2_max = std::min(4.0, opt.rho_cap / rho);
        if (a2_max <= 1.05) continue;
        const double a2 = uniform_in(rng, 1.05, a2_max);
        const double c = std::sqrt(uniform_in(rng, 0.5, 0.99));
        const double factor = (rng.uniform() < 0.5 ? -1.0 : 1.0) * uniform_in(rng, 0.3, 0.97);
        const double M = uniform_in(rng, 0.2, 3.0);
        const double B = uniform_in(rng, 1.0, 50.0);
        const PlantParams pp = PlantParams::make(std::sqrt(a2), std::nullopt, factor, c, M, B);
        check_instance(m, pp, rng, i, series, full);
        ++i;
    }
    return {summarize("series g/f/g~/f~ vs truncated sums", series, opt.tol),
            summarize("lookahead G and J vs truncated sums", full, opt.tol)};
}

std::vector<CheckResult> identity_suite(const ChannelModel& model, const PlantParams& params,
                                        const IdentityOptions& opt) {
    const Lookahead lk(model, params);
    if (!lk.spectral_feasible()) {
        std::ostringstream d;
        d << "divergent series: a^2 rho(P1E) = " << params.a2() * lk.rho_p1e() << " >= 1";
        return {{"identity feasibility", false, d.str()}};
    }
    CounterRng setup(opt.seed, 0);
    const std::size_t n = model.n();
    const double scale = std::sqrt(params.B);
    std::ostringstream da, db;
    bool ok_a = true, ok_b = true;
    for (int s = 0; s < opt.states; ++s) {
        const long D = 1 + static_cast<long>(setup.uniform() * 3);
        SensorInfo info;
        info.Rk = 0;
        info.k = 1 + static_cast<long>(setup.uniform() * 10);
        info.x_Rk = scale * uniform_in(setup, -20.0, 20.0);
        info.x = scale * uniform_in(setup, -15.0, 15.0);
        info.z = scale * uniform_in(setup, -3.0, 3.0);
        info.p = random_prob(n, setup);
        const ChannelState gamma{1 + static_cast<int>(setup.uniform() * static_cast<double>(n))};
        const double xhat = info.x - info.z;

        // (a) silent step: E[G^D_{k+1}] = G^{D+1}_k
        SensorInfo next = info;
        next.k = info.k + 1;
        next.p = model.p0.apply(info.p);
        // (b) reception at k in state gamma: E[G^D_{k+1}] = J^{D+1}(x_k, gamma)
        SensorInfo recv;
        recv.k = info.k + 1;
        recv.Rk = info.k;
        recv.x_Rk = info.x;
        recv.p = model.p1.column(gamma.zero_based());

        CounterRng noise(opt.seed + 1, static_cast<std::uint64_t>(s));
        double sa = 0, sa2 = 0, sb = 0, sb2 = 0;
        for (long i = 0; i < opt.samples; ++i) {
            const double v = std::sqrt(params.M) * noise.standard_normal();
            next.x = params.a * info.x + params.L * xhat + v;
            next.z = next.x - params.abar * xhat;
            const double ga = lk.lookahead_G(next, D);
            recv.x = params.abar * info.x + v;
            recv.z = v;
            const double gb = lk.lookahead_G(recv, D);
            sa += ga;
            sa2 += ga * ga;
            sb += gb;
            sb2 += gb * gb;
        }
        const double ns = static_cast<double>(opt.samples);
        const auto check = [&](double sum, double sum2, double want, std::ostringstream& out) {
            const double mean = sum / ns;
            const double var = std::max(0.0, (sum2 / ns - mean * mean) * ns / (ns - 1.0));
            const double se = std::sqrt(var / ns);
            const double z = se > 0 ? std::abs(mean - want) / se : (mean == want ? 0.0 : INFINITY);
            out << " [state " << s << " D=" << D << ": mc " << mean << " closed " << want << " z " << z << "]";
            return z <= opt.se_multiple;
        };
        ok_a = check(sa, sa2, lk.lookahead_G(info, D + 1), da) && ok_a;
        ok_b = check(sb, sb2, lk.perf_eval_J(info.x, gamma, D + 1), db) && ok_b;
    }
    return {{"E[G^D_{k+1} | t_k = 0] = G^{D+1}_k", ok_a, da.str()},
            {"E[G^D_{k+1} | r_k = 1] = J^{D+1}", ok_b, db.str()}};
}

CheckResult h_sign_scan(const PlantParams& params, const SignOptions& opt) {
    // y = 0 plus a geometric grid up to y_max, dense enough near B where reversals live.
    std::vector<double> ys{0.0};
    const double lo = 1e-3;
    for (int i = 0; i < opt.y_points - 1; ++i)
        ys.push_back(lo * std::pow(opt.y_max / lo, static_cast<double>(i) / (opt.y_points - 2)));
    long violations = 0;
    std::ostringstream d;
    for (double y : ys) {
        bool seen_positive = false;
        for (long w = 1; w <= opt.w_max; ++w) {
            const bool pos = open_loop_H(w, y, params) > 0.0;
            if (pos) seen_positive = true;
            else if (seen_positive) {
                if (violations == 0) d << "first reversal at y=" << y << " w=" << w << "; ";
                ++violations;
                break;
            }
        }
    }
    d << violations << " grid values with a sign reversal (B = " << params.B << ")";
    return {"H sign monotonicity", violations == 0, d.str()};
}

CheckResult q_monotonicity(const Lookahead& lk, long theta_max) {
    Vector prev = q_vector(lk, 0.0);
    long violations = 0;
    std::ostringstream d;
    for (long th = 1; th <= theta_max; ++th) {
        const Vector q = q_vector(lk, static_cast<double>(th));
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (!(q[i] > prev[i])) {
                if (violations == 0)
                    d << "first violation: entry " << i + 1 << " Q(" << th - 1 << ")=" << prev[i] << " Q(" << th
                      << ")=" << q[i] << "; ";
                ++violations;
            }
        }
        prev = q;
    }
    d << violations << " non-increasing steps over theta in [0, " << theta_max << "]";
    return {"Q(theta) strictly increasing", violations == 0, d.str()};
}

CheckResult r_bound_check(const Lookahead& lk, const SignOptions& opt) {
    CounterRng rng(opt.seed, 1);
    const std::size_t n = lk.model().n();
    long violations = 0;
    double worst = -INFINITY;
    for (int i = 0; i < opt.r_evaluations; ++i) {
        const double x = uniform_in(rng, 0.0, 1e4);
        const ChannelState gamma{1 + static_cast<int>(rng.uniform() * static_cast<double>(n))};
        const long theta = 1 + static_cast<long>(rng.uniform() * 10);
        const double gap = lk.perf_eval_J(x, gamma, theta) - r_bound(lk, theta, gamma);
        worst = std::max(worst, gap);
        if (gap > opt.r_slack) ++violations;
    }
    std::ostringstream d;
    d << violations << " violations in " << opt.r_evaluations << " evaluations, max J - R = " << worst;
    return {"J <= R(theta)", violations == 0, d.str()};
}

std::vector<CheckResult> sign_suite(const ChannelModel& model, const PlantParams& params, const SignOptions& opt) {
    const Lookahead lk(model, params);
    if (!lk.spectral_feasible()) {
        std::ostringstream d;
        d << "divergent series: a^2 rho(P1E) = " << params.a2() * lk.rho_p1e() << " >= 1";
        return {h_sign_scan(params, opt), {"sign feasibility", false, d.str()}};
    }
    return {h_sign_scan(params, opt), q_monotonicity(lk, opt.theta_max), r_bound_check(lk, opt)};
}

}  // namespace etmc::verify
