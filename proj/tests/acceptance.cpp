// Acceptance gate for the motion-estimation toolkit.
//
// Runs ten end-to-end checks, each with tolerances and a time budget pinned
// in this file, and prints exactly one PASS/FAIL line per check.  The
// process exit code is the number of failing checks, so `ctest` (or any
// shell) can gate on it directly.  Pass check numbers as arguments to run a
// subset, e.g. `odt_acceptance 4 5`.
#include <odt/odt.hpp>

#include "support/analytic_jet.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace odt;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

double median_of(std::vector<double> v) {
    const std::size_t m = v.size();
    std::nth_element(v.begin(), v.begin() + m / 2, v.end());
    double upper = v[m / 2];
    if (m % 2 == 1) {
        return upper;
    }
    std::nth_element(v.begin(), v.begin() + m / 2 - 1, v.end());
    return 0.5 * (v[m / 2 - 1] + upper);
}

std::vector<NuFrame> simulate_trajectory_nu(const Phantom &ph,
                                            const RigidTrajectory &truth,
                                            const PolarGrid &grid) {
    std::vector<NuFrame> frames(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        frames[j] = simulate_nu(ph, truth.rotations[j], truth.translations[j],
                                grid, truth.times[j]);
    }
    return frames;
}

// ---------------------------------------------------------------------------
// 1. Common-circle identities on random pose pairs.
//
// For 1000 random non-degenerate pairs and angles beta in [-pi/2, pi/2] the
// primal/dual in-plane curves must land on the claimed sphere points:
// pullbacks through both poses coincide, the curves satisfy their exchange
// symmetries, and every point lies on both shifted spheres of radius k0.
// ---------------------------------------------------------------------------
Outcome arc_identity_suite() {
    const double k0 = two_pi;
    std::mt19937_64 rng(101);
    double worst = 0.0;
    const auto track = [&](double r) { worst = std::max(worst, r); };

    int pairs = 0;
    while (pairs < 1000) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        try {
            (void)arc_basis(Rs, Rt, k0);
        } catch (const DegenerateInputError &) {
            continue;
        }
        ++pairs;
        for (int l = 0; l <= 8; ++l) {
            const double beta = -0.5 * pi + l * pi / 8.0;
            const Vec3 sig = sigma(Rs, Rt, beta, k0);
            const Vec3 sig_d = sigma_dual(Rs, Rt, beta, k0);

            track((Rs * h_map(gamma(Rs, Rt, beta, k0), k0) - sig).norm());
            track((Rt * h_map(gamma(Rt, Rs, -beta, k0), k0) - sig).norm());
            track((Rs * h_map(gamma_dual(Rs, Rt, beta, k0), k0) - sig_d)
                      .norm());
            track((Rt * h_map(gamma_dual(Rt, Rs, beta, k0), k0) + sig_d)
                      .norm());

            track((sigma(Rt, Rs, -beta, k0) - sig).norm());
            track((sigma_dual(Rt, Rs, beta, k0) + sig_d).norm());

            track(std::abs((sig + k0 * Rs.col(2)).norm() - k0));
            track(std::abs((sig + k0 * Rt.col(2)).norm() - k0));
            track(std::abs((sig_d + k0 * Rs.col(2)).norm() - k0));
            track(std::abs((sig_d - k0 * Rt.col(2)).norm() - k0));
        }
    }
    return {worst < 1e-12,
            "max identity residual " + sci(worst) + " over 1000 pairs x 9 "
            "angles (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 2. Matched-arc intensity agreement, evaluated analytically.
//
// Squared transform magnitudes of the default phantom must agree along the
// matched primal curves (and along the dual curves, using that the
// magnitude is even in frequency for a real object): max mismatch < 1e-10.
// ---------------------------------------------------------------------------
Outcome nu_matching() {
    const double k0 = two_pi;
    const Phantom ph = default_phantom();
    std::mt19937_64 rng(202);
    double worst = 0.0;

    int pairs = 0;
    while (pairs < 200) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        try {
            (void)arc_basis(Rs, Rt, k0);
        } catch (const DegenerateInputError &) {
            continue;
        }
        ++pairs;
        for (int l = 0; l <= 20; ++l) {
            const double beta = -0.5 * pi + l * pi / 20.0;
            const double lhs = std::norm(
                phantom_ft(ph, Rs * h_map(gamma(Rs, Rt, beta, k0), k0)));
            const double rhs = std::norm(
                phantom_ft(ph, Rt * h_map(gamma(Rt, Rs, -beta, k0), k0)));
            worst = std::max(worst, std::abs(lhs - rhs));

            const double lhs_d = std::norm(
                phantom_ft(ph, Rs * h_map(gamma_dual(Rs, Rt, beta, k0), k0)));
            const double rhs_d = std::norm(
                phantom_ft(ph, Rt * h_map(gamma_dual(Rt, Rs, beta, k0), k0)));
            worst = std::max(worst, std::abs(lhs_d - rhs_d));
        }
    }
    return {worst < 1e-10,
            "max primal+dual mismatch " + sci(worst) + " over 200 pairs "
            "(tol 1e-10)"};
}

// ---------------------------------------------------------------------------
// 3. Differential matching relation at one time step.
//
// Along the scan angle the time derivative of the squared measurement must
// equal (rho (k0 - kappa)/r + zeta) times the angular derivative.  With
// closed-form derivative tables the relative residual must be < 1e-6; with
// central differences on simulated frames (N = 64, benchmark spacing) it
// must be < 1e-2.
// ---------------------------------------------------------------------------
Outcome infinitesimal_relation() {
    const double k0 = two_pi;
    const PolarGrid grid = PolarGrid::standard(k0, 64);
    const Phantom ph = default_phantom();
    const Vec3 axis = benchmark_axis();
    const double rho_true = std::hypot(axis.x(), axis.y());
    const double zeta_true = axis.z();
    const int phi_index = 32; // grid angle pi/4 = in-plane direction of omega
    const int m = grid.size();

    const Rotation R = rodrigues_exp(axis, 0.25 * pi);
    std::vector<double> dtnu(std::size_t(m) * m);
    std::vector<double> dphinu(std::size_t(m) * m);
    for (int i = 0; i < m; ++i) {
        const double r = grid.radii[i];
        for (int j = 0; j < m; ++j) {
            const double phi = grid.angles[j];
            const Vec2 k(r * std::cos(phi), r * std::sin(phi));
            const Vec3 y = R * h_map(k, k0);
            const test::FtJet jet = test::phantom_ft_jet(ph, y);
            const Complex dF_t = test::jet_directional(jet, axis.cross(y));
            const Complex dF_phi = test::jet_directional(
                jet, R * Vec3(-r * std::sin(phi), r * std::cos(phi), 0.0));
            const std::size_t at = grid.flat(i, j);
            dtnu[at] = 2.0 * std::real(std::conj(jet.value) * dF_t);
            dphinu[at] = 2.0 * std::real(std::conj(jet.value) * dF_phi);
        }
    }
    const auto rel_residual = [&](const GpqProfile &prof) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < prof.g.size(); ++i) {
            const double e =
                prof.g[i] - rho_true * prof.p[i] - zeta_true * prof.q[i];
            num += e * e;
            den += prof.g[i] * prof.g[i];
        }
        return std::sqrt(num / den);
    };
    const double rel_analytic = rel_residual(gpq(dtnu, dphinu, grid, phi_index));

    const RigidTrajectory traj = constant_axis_trajectory(256);
    const auto frame = [&](int j) {
        return simulate_nu(ph, traj.rotations[j], Vec3::Zero(), grid,
                           traj.times[j]);
    };
    const NuFrame prev = frame(31);
    const NuFrame mid = frame(32);
    const NuFrame next = frame(33);
    const double rel_fd =
        rel_residual(gpq(dt_nu(prev, mid, next), dphi_nu(mid), grid, phi_index));

    return {rel_analytic < 1e-6 && rel_fd < 1e-2,
            "relative residual " + sci(rel_analytic) +
                " closed-form (tol 1e-6), " + sci(rel_fd) +
                " finite-difference (tol 1e-2)"};
}

// ---------------------------------------------------------------------------
// 4. Constant-axis benchmark, N = 64, 256 steps over one revolution.
//
// The scan angle at t = pi/4 must be the on-grid value pi/4 exactly; the
// integrated angular-velocity trajectories (both retractions) must stay
// within 5e-2 relative Frobenius error, and the refined common-circle
// trajectory within 5e-3 everywhere with median at most 1e-3.
// ---------------------------------------------------------------------------
Outcome constant_axis_benchmark() {
    const PolarGrid grid = PolarGrid::standard(two_pi, 64);
    const Phantom ph = default_phantom();
    const RigidTrajectory truth = constant_axis_trajectory(256);
    const std::vector<NuFrame> frames = simulate_trajectory_nu(ph, truth, grid);

    const PhiScan scan = scan_phi(frames, grid, 32);
    const double phi_err =
        std::abs(scan.phis[scan.best_index] - 0.25 * pi);

    const MotionEstimate est = estimate_motion(
        frames, truth.times, EstimatorKind::Combined, Retraction::Polar);
    double max_inf = 0.0;
    double max_cc = 0.0;
    std::vector<double> cc(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        max_inf = std::max(
            max_inf, frob_rel_error(truth.rotations[j], est.inf_polar[j]));
        max_inf = std::max(
            max_inf, frob_rel_error(truth.rotations[j], est.inf_cayley[j]));
        cc[j] = frob_rel_error(truth.rotations[j], est.rotations[j]);
        max_cc = std::max(max_cc, cc[j]);
    }
    const double med_cc = median_of(cc);

    const bool pass = phi_err == 0.0 && max_inf <= 5e-2 && max_cc <= 5e-3 &&
                      med_cc <= 1e-3;
    return {pass, "scan angle error " + sci(phi_err) +
                      " (exact 0 required), max inf " + sci(max_inf) +
                      " (tol 5e-2), max refined " + sci(max_cc) +
                      " (tol 5e-3), median refined " + sci(med_cc) +
                      " (tol 1e-3)"};
}

// ---------------------------------------------------------------------------
// 5. Moving-axis benchmark (a = 0.28, b = 0.5), N = 64, 256 steps.
//
// The refined trajectory may reach 2e-2 relative Frobenius error while the
// axis settles (t < 0.5) and must stay within 5e-3 afterwards.
// ---------------------------------------------------------------------------
Outcome moving_axis_benchmark() {
    const PolarGrid grid = PolarGrid::standard(two_pi, 64);
    const Phantom ph = default_phantom();
    const RigidTrajectory truth = moving_axis_trajectory(256, 0.28, 0.5);
    const std::vector<NuFrame> frames = simulate_trajectory_nu(ph, truth, grid);

    const MotionEstimate est = estimate_motion(
        frames, truth.times, EstimatorKind::Combined, Retraction::Polar);
    double max_early = 0.0;
    double max_late = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const double e = frob_rel_error(truth.rotations[j], est.rotations[j]);
        (truth.times[j] < 0.5 ? max_early : max_late) =
            std::max(truth.times[j] < 0.5 ? max_early : max_late, e);
    }
    return {max_early <= 2e-2 && max_late <= 5e-3,
            "max refined error " + sci(max_early) + " for t < 0.5 (tol 2e-2), " +
                sci(max_late) + " after (tol 5e-3)"};
}

// ---------------------------------------------------------------------------
// 6. Translation recovery along the benchmark trajectory.
//
// With d(t) = 4 (sin t, sin t, sin t): given the exact rotations every
// recovered shift must be within 1e-3; with rotations estimated from the
// squared data the median error must be at most 0.1.
// ---------------------------------------------------------------------------
Outcome translation_benchmark() {
    const PolarGrid grid = PolarGrid::standard(two_pi, 64);
    const Phantom ph = default_phantom();
    const RigidTrajectory truth = with_translation_trajectory(256);

    std::vector<MuFrame> mus(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        mus[j] = simulate_mu(ph, truth.rotations[j], truth.translations[j],
                             grid, truth.times[j]);
    }

    const std::vector<Vec3> d_exact = estimate_translations(mus, truth.rotations);
    double max_exact = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        max_exact =
            std::max(max_exact, (d_exact[j] - truth.translations[j]).norm());
    }

    std::vector<NuFrame> nus(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        nus[j] = nu_from_mu(mus[j]);
    }
    const MotionEstimate est = estimate_motion(
        nus, truth.times, EstimatorKind::Combined, Retraction::Polar);
    const std::vector<Vec3> d_est = estimate_translations(mus, est.rotations);
    std::vector<double> errs(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        errs[j] = (d_est[j] - truth.translations[j]).norm();
    }
    const double med_est = median_of(errs);

    return {max_exact <= 1e-3 && med_est <= 0.1,
            "max error " + sci(max_exact) + " with exact rotations (tol "
            "1e-3), median " + sci(med_est) + " with estimated rotations "
            "(tol 0.1)"};
}

// ---------------------------------------------------------------------------
// 7. First-order convergence of the trajectory integrator.
//
// For omega(t) = (0, 0, 1 + t) on [0, 1] the final-pose error against the
// closed form exp((T + T^2/2) hat(e3)) must halve (within 15%) when the
// step count doubles through 100 -> 200 -> 400, for both retractions.
// ---------------------------------------------------------------------------
Outcome integrator_order() {
    const Rotation R_true = rodrigues_exp(Vec3(0.0, 0.0, 1.0), 1.5);
    const auto final_error = [&](int n, Retraction kind) {
        std::vector<double> times(n + 1);
        std::vector<Vec3> omegas(n + 1);
        for (int j = 0; j <= n; ++j) {
            times[j] = static_cast<double>(j) / n;
            omegas[j] = Vec3(0.0, 0.0, 1.0 + times[j]);
        }
        return (integrate_rotation(times, omegas, kind).back() - R_true)
            .norm();
    };

    bool pass = true;
    std::string detail;
    for (const Retraction kind : {Retraction::Polar, Retraction::Cayley}) {
        const double e100 = final_error(100, kind);
        const double e200 = final_error(200, kind);
        const double e400 = final_error(400, kind);
        const double r1 = e100 / e200;
        const double r2 = e200 / e400;
        pass = pass && r1 >= 1.7 && r1 <= 2.3 && r2 >= 1.7 && r2 <= 2.3;
        if (!detail.empty()) {
            detail += ", ";
        }
        detail += std::string(kind == Retraction::Polar ? "polar" : "cayley") +
                  " ratios " + sci(r1) + "/" + sci(r2);
    }
    return {pass, detail + " (window [1.7, 2.3])"};
}

// ---------------------------------------------------------------------------
// 8. Stereographic reformulation.
//
// Chart images of the matched arcs must be straight lines (total-least-
// squares distance < 1e-10), and the line-intersection estimator must agree
// with the direct one within 1e-2 Frobenius on 20 random pairs.
// ---------------------------------------------------------------------------
Outcome stereo_checks() {
    const double k0 = two_pi;
    std::mt19937_64 rng(808);
    double worst_col = 0.0;
    int triples = 0;
    while (triples < 20) {
        const Rotation Rs = test::random_rotation(rng);
        const Rotation Rt = test::random_rotation(rng);
        if (std::abs(Rs.col(2).dot(Rt.col(2))) > 0.98) {
            continue; // near-coaxial pairs belong to check 9
        }
        ++triples;
        std::vector<Vec2> primal;
        std::vector<Vec2> dual;
        for (int l = -10; l <= 10; ++l) {
            if (l == 0) {
                continue; // chart undefined at the shared origin
            }
            const double beta = l * pi / 20.0;
            primal.push_back(tau(gamma(Rs, Rt, beta, k0), k0));
            dual.push_back(tau(gamma_dual(Rs, Rt, beta, k0), k0));
        }
        worst_col = std::max(worst_col, collinearity_check(primal));
        worst_col = std::max(worst_col, collinearity_check(dual));
    }

    const PolarGrid grid = PolarGrid::standard(k0, 64);
    const Phantom ph = default_phantom();
    std::mt19937_64 rng2(809);
    double worst_diff = 0.0;
    int pairs = 0;
    while (pairs < 20) {
        const Rotation Rs = test::random_rotation(rng2);
        const Rotation Rt = test::random_rotation(rng2);
        if (std::abs(Rs.col(2).dot(Rt.col(2))) > 0.98) {
            continue;
        }
        ++pairs;
        const NuFrame nu_s = simulate_nu(ph, Rs, Vec3::Zero(), grid);
        const NuFrame nu_t = simulate_nu(ph, Rt, Vec3::Zero(), grid);
        const PolarInterpolator interp_s(nu_s);
        const PolarInterpolator interp_t(nu_t);
        const Rotation direct =
            estimate_rotation_direct(nu_s, nu_t, interp_s, interp_t);
        const Rotation stereo = estimate_rotation_stereo(interp_s, interp_t);
        worst_diff = std::max(worst_diff, (direct - stereo).norm());
    }

    return {worst_col < 1e-10 && worst_diff <= 1e-2,
            "max chart-line deviation " + sci(worst_col) + " (tol 1e-10), "
            "max stereo-vs-direct distance " + sci(worst_diff) +
            " (tol 1e-2) over 20 pairs"};
}

// ---------------------------------------------------------------------------
// 9. Coaxial (degenerate) alignment family, plain and reflected branches.
//
// For poses sharing (or mirroring) the projection axis the in-plane angle
// must be detected within one angular grid cell at an off-grid angle, and
// translation recovery through the whole-disk phase system must reach 1e-6
// at an on-grid angle.
// ---------------------------------------------------------------------------
Outcome degenerate_family() {
    const double k0 = two_pi;
    const PolarGrid grid = PolarGrid::standard(k0, 64);
    const Phantom ph = default_phantom();
    const Rotation Rs = euler_to_rotation({0.8, 1.1, 0.2});
    const double cell = grid.angular_step();

    const double alpha_off = pi / 3.0;
    const NuFrame nu_s = simulate_nu(ph, Rs, Vec3::Zero(), grid);
    bool branches_ok = true;
    double worst_alpha = 0.0;
    for (const bool reflected : {false, true}) {
        const Rotation Rt = reflected
                                ? Rotation(Rs * axis_rotation_y(pi) *
                                           axis_rotation_z(alpha_off))
                                : Rotation(Rs * axis_rotation_z(alpha_off));
        const NuFrame nu_t = simulate_nu(ph, Rt, Vec3::Zero(), grid);
        const auto det = detect_degenerate(nu_s, nu_t);
        if (!det.has_value() || det->reflected != reflected) {
            branches_ok = false;
            continue;
        }
        worst_alpha = std::max(worst_alpha,
                               std::abs(wrap_pi(det->alpha - alpha_off)));
    }

    const double alpha_on = 0.25 * pi; // node lookups are exact on the grid
    const Vec3 d_t(0.3, -0.2, 0.15);
    const MuFrame mu_s = simulate_mu(ph, Rs, Vec3::Zero(), grid);
    double worst_d = 0.0;
    for (const bool reflected : {false, true}) {
        const Rotation Rt = reflected
                                ? Rotation(Rs * axis_rotation_y(pi) *
                                           axis_rotation_z(alpha_on))
                                : Rotation(Rs * axis_rotation_z(alpha_on));
        const MuFrame mu_t = simulate_mu(ph, Rt, d_t, grid);
        const std::vector<Vec3> d_hat =
            estimate_translations({mu_s, mu_t}, {Rs, Rt});
        worst_d = std::max(worst_d, (d_hat[1] - d_t).norm());
    }

    return {branches_ok && worst_alpha <= cell && worst_d < 1e-6,
            std::string(branches_ok ? "both branches detected"
                                    : "branch detection FAILED") +
                ", angle error " + sci(worst_alpha) + " (tol " + sci(cell) +
                "), translation error " + sci(worst_d) + " (tol 1e-6)"};
}

// ---------------------------------------------------------------------------
// 10. Optical-center recovery of a single off-center ball.
// ---------------------------------------------------------------------------
Outcome optical_center_check() {
    Phantom ph;
    ph.support_radius = 1.0;
    const Vec3 C(0.08, -0.05, 0.03);
    ph.ellipsoids = {{C, Mat3::Identity(), Vec3(0.6, 0.6, 0.6), 1.0}};

    const PolarGrid grid = PolarGrid::standard(two_pi, 64);
    const std::vector<Rotation> rotations = {
        euler_to_rotation({0.3, 0.9, 1.4}),
        euler_to_rotation({2.2, 1.7, 0.5}),
        euler_to_rotation({4.0, 0.6, 2.8}),
    };
    const std::vector<Vec3> translations = {Vec3(0.1, -0.2, 0.05),
                                            Vec3::Zero(),
                                            Vec3(-0.15, 0.1, 0.2)};
    std::vector<MuFrame> frames;
    for (std::size_t t = 0; t < rotations.size(); ++t) {
        frames.push_back(simulate_mu(ph, rotations[t], translations[t], grid));
    }
    const Vec3 C_hat = optical_center(frames, rotations, translations);
    const double err = (C_hat - C).norm();
    return {err < 1e-4, "center error " + sci(err) + " (tol 1e-4)"};
}

} // namespace

int main(int argc, char **argv) {
    using CheckFn = Outcome (*)();
    struct Entry {
        int id;
        const char *label;
        double budget_seconds;
        CheckFn fn;
    };
    const std::vector<Entry> entries = {
        {1, "common-circle identities", 5.0, arc_identity_suite},
        {2, "matched-arc intensity agreement", 10.0, nu_matching},
        {3, "differential matching relation", 30.0, infinitesimal_relation},
        {4, "constant-axis benchmark", 300.0, constant_axis_benchmark},
        {5, "moving-axis benchmark", 300.0, moving_axis_benchmark},
        {6, "translation recovery", 360.0, translation_benchmark},
        {7, "integrator convergence order", 5.0, integrator_order},
        {8, "stereographic reformulation", 60.0, stereo_checks},
        {9, "coaxial alignment family", 30.0, degenerate_family},
        {10, "optical-center recovery", 5.0, optical_center_check},
    };

    std::set<int> only;
    for (int a = 1; a < argc; ++a) {
        only.insert(std::atoi(argv[a]));
    }

    int failures = 0;
    for (const Entry &entry : entries) {
        if (!only.empty() && only.count(entry.id) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = entry.fn();
        } catch (const std::exception &ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        const bool in_budget = seconds <= entry.budget_seconds;
        const bool ok = out.pass && in_budget;
        if (!ok) {
            ++failures;
        }
        std::printf("[%2d] %s %s: %s%s [%.1fs, budget %.0fs]\n", entry.id,
                    ok ? "PASS" : "FAIL", entry.label, out.detail.c_str(),
                    out.pass && !in_budget ? " (over budget)" : "", seconds,
                    entry.budget_seconds);
        std::fflush(stdout);
    }
    return failures;
}
