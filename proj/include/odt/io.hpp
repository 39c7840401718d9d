// odtmotion: rigid-motion estimation for optical diffraction tomography
// Persistence: JSON experiment configs, CSV/JSON error reports, and frame
// sets in a small binary container or plain CSV.  All text output is
// byte-deterministic for a given input so runs can be diffed.
#pragma once

#include <odt/errors.hpp>
#include <odt/frames.hpp>
#include <odt/grid.hpp>
#include <odt/phantom.hpp>
#include <odt/scenario.hpp>
#include <odt/so3.hpp>
#include <odt/trajectory.hpp>
#include <odt/types.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace odt {

using nlohmann::json;

// =============================================================================
// Small helpers
// =============================================================================

namespace detail {

/// Full-precision decimal formatting (17 significant digits round-trips a
/// double exactly); NaN is spelled "nan" regardless of platform.
inline std::string format_full(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::ofstream open_output(const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    return out;
}

inline std::ifstream open_input(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    return in;
}

inline json mat3_to_json(const Mat3 &m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    }
    return rows;
}

inline Mat3 mat3_from_json(const json &j) {
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            m(r, c) = j.at(r).at(c).get<double>();
        }
    }
    return m;
}

inline json vec3_to_json(const Vec3 &v) { return {v.x(), v.y(), v.z()}; }

inline Vec3 vec3_from_json(const json &j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

} // namespace detail

// =============================================================================
// Enum names
// =============================================================================

inline std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::ConstantAxis: return "constant_axis";
    case Scenario::MovingAxis: return "moving_axis";
    case Scenario::WithTranslation: return "with_translation";
    case Scenario::Custom: return "custom";
    }
    return "constant_axis";
}

inline std::string to_string(EstimatorKind e) {
    switch (e) {
    case EstimatorKind::Direct: return "direct";
    case EstimatorKind::Infinitesimal: return "infinitesimal";
    case EstimatorKind::Combined: return "combined";
    case EstimatorKind::Stereo: return "stereo";
    }
    return "combined";
}

inline std::string to_string(Retraction r) {
    return r == Retraction::Cayley ? "cayley" : "polar";
}

inline Scenario scenario_from_string(const std::string &s) {
    if (s == "constant_axis") return Scenario::ConstantAxis;
    if (s == "moving_axis") return Scenario::MovingAxis;
    if (s == "with_translation") return Scenario::WithTranslation;
    if (s == "custom") return Scenario::Custom;
    throw ConfigError("unknown scenario: " + s);
}

inline EstimatorKind estimator_from_string(const std::string &s) {
    if (s == "direct") return EstimatorKind::Direct;
    if (s == "infinitesimal") return EstimatorKind::Infinitesimal;
    if (s == "combined") return EstimatorKind::Combined;
    if (s == "stereo") return EstimatorKind::Stereo;
    throw ConfigError("unknown estimator: " + s);
}

inline Retraction retraction_from_string(const std::string &s) {
    if (s == "polar") return Retraction::Polar;
    if (s == "cayley") return Retraction::Cayley;
    throw ConfigError("unknown retraction: " + s);
}

// =============================================================================
// Phantom and trajectory JSON
// =============================================================================

inline json phantom_to_json(const Phantom &ph) {
    json ells = json::array();
    for (const Ellipsoid &e : ph.ellipsoids) {
        ells.push_back({{"center", detail::vec3_to_json(e.center)},
                        {"orientation", detail::mat3_to_json(e.orientation)},
                        {"semi_axes", detail::vec3_to_json(e.semi_axes)},
                        {"amplitude", e.amplitude}});
    }
    return {{"ellipsoids", ells}, {"support_radius", ph.support_radius}};
}

inline Phantom phantom_from_json(const json &j) {
    Phantom ph;
    ph.support_radius = j.at("support_radius").get<double>();
    for (const json &je : j.at("ellipsoids")) {
        Ellipsoid e;
        e.center = detail::vec3_from_json(je.at("center"));
        if (je.contains("orientation")) {
            e.orientation = detail::mat3_from_json(je.at("orientation"));
        }
        e.semi_axes = detail::vec3_from_json(je.at("semi_axes"));
        e.amplitude = je.at("amplitude").get<double>();
        ph.ellipsoids.push_back(e);
    }
    validate_phantom(ph);
    return ph;
}

inline json trajectory_to_json(const RigidTrajectory &traj) {
    json rotations = json::array();
    json translations = json::array();
    for (std::size_t t = 0; t < traj.size(); ++t) {
        rotations.push_back(detail::mat3_to_json(traj.rotations[t]));
        translations.push_back(detail::vec3_to_json(traj.translations[t]));
    }
    return {{"times", traj.times},
            {"rotations", rotations},
            {"translations", translations}};
}

inline RigidTrajectory trajectory_from_json(const json &j) {
    RigidTrajectory traj;
    traj.times = j.at("times").get<std::vector<double>>();
    for (const json &jr : j.at("rotations")) {
        traj.rotations.push_back(detail::mat3_from_json(jr));
    }
    for (const json &jd : j.at("translations")) {
        traj.translations.push_back(detail::vec3_from_json(jd));
    }
    if (traj.rotations.size() != traj.times.size() ||
        traj.translations.size() != traj.times.size()) {
        throw ConfigError("trajectory: times/rotations/translations lengths differ");
    }
    return traj;
}

// =============================================================================
// Experiment config JSON
// =============================================================================

inline json config_to_json(const ExperimentConfig &cfg) {
    json j = {{"k0", cfg.k0},
              {"grid_n", cfg.grid_n},
              {"time_steps", cfg.time_steps},
              {"scenario", to_string(cfg.scenario)},
              {"axis", detail::vec3_to_json(cfg.axis)},
              {"moving_a", cfg.moving_a},
              {"moving_b", cfg.moving_b},
              {"translation_amplitude", cfg.translation_amplitude},
              {"estimator", to_string(cfg.estimator)},
              {"retraction", to_string(cfg.retraction)},
              {"seed", cfg.seed},
              {"noise_sigma", cfg.noise_sigma},
              {"out", cfg.out_path},
              {"phantom", phantom_to_json(cfg.phantom)}};
    if (cfg.scenario == Scenario::Custom) {
        j["custom_trajectory"] = trajectory_to_json(cfg.custom_trajectory);
    }
    return j;
}

inline ExperimentConfig config_from_json(const json &j) {
    ExperimentConfig cfg;
    if (j.contains("k0")) cfg.k0 = j.at("k0").get<double>();
    if (j.contains("grid_n")) cfg.grid_n = j.at("grid_n").get<int>();
    if (j.contains("time_steps")) cfg.time_steps = j.at("time_steps").get<int>();
    if (j.contains("scenario")) {
        cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    }
    if (j.contains("axis")) cfg.axis = detail::vec3_from_json(j.at("axis"));
    if (j.contains("moving_a")) cfg.moving_a = j.at("moving_a").get<double>();
    if (j.contains("moving_b")) cfg.moving_b = j.at("moving_b").get<double>();
    if (j.contains("translation_amplitude")) {
        cfg.translation_amplitude = j.at("translation_amplitude").get<double>();
    }
    if (j.contains("estimator")) {
        cfg.estimator =
            estimator_from_string(j.at("estimator").get<std::string>());
    }
    if (j.contains("retraction")) {
        cfg.retraction =
            retraction_from_string(j.at("retraction").get<std::string>());
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise_sigma")) {
        cfg.noise_sigma = j.at("noise_sigma").get<double>();
    }
    if (j.contains("out")) cfg.out_path = j.at("out").get<std::string>();
    if (j.contains("phantom")) cfg.phantom = phantom_from_json(j.at("phantom"));
    if (j.contains("custom_trajectory")) {
        cfg.custom_trajectory = trajectory_from_json(j.at("custom_trajectory"));
    }
    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig read_config(const std::string &path) {
    std::ifstream in = detail::open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &err) {
        throw IoError("bad JSON in " + path + ": " + err.what());
    }
    return config_from_json(j);
}

// =============================================================================
// Error report persistence
// =============================================================================

namespace detail {

/// Aggregate of the finite entries of a column: max, median, final value.
inline json column_summary(const std::vector<double> &col) {
    std::vector<double> finite;
    for (double v : col) {
        if (std::isfinite(v)) {
            finite.push_back(v);
        }
    }
    if (finite.empty()) {
        return nullptr;
    }
    const double final_value = finite.back();
    std::sort(finite.begin(), finite.end());
    const std::size_t m = finite.size();
    const double median = (m % 2 == 1)
                              ? finite[m / 2]
                              : 0.5 * (finite[m / 2 - 1] + finite[m / 2]);
    return {{"max", finite.back()}, {"median", median}, {"final", final_value}};
}

} // namespace detail

/// Write the per-step error table as CSV at `path` and an aggregate summary
/// (config echo, column stats, warnings, timings) as JSON at `path` + ".json".
inline void write_report(const ErrorReport &report, const std::string &path) {
    std::ofstream csv = detail::open_output(path);
    csv << "t,err_pol,err_cay,err_cc,err_translation,j_min\n";
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        csv << detail::format_full(report.times[i]) << ','
            << detail::format_full(report.err_pol[i]) << ','
            << detail::format_full(report.err_cay[i]) << ','
            << detail::format_full(report.err_cc[i]) << ','
            << detail::format_full(report.err_translation[i]) << ','
            << detail::format_full(report.j_min[i]) << '\n';
    }
    if (!csv) {
        throw IoError("write failed: " + path);
    }

    json summary = {
        {"config", config_to_json(report.config)},
        {"steps", report.times.size()},
        {"err_pol", detail::column_summary(report.err_pol)},
        {"err_cay", detail::column_summary(report.err_cay)},
        {"err_cc", detail::column_summary(report.err_cc)},
        {"err_translation", detail::column_summary(report.err_translation)},
        {"j_min", detail::column_summary(report.j_min)},
        {"warnings", report.warnings},
        {"ambiguous_steps", report.ambiguous_steps},
        {"seconds_simulate", report.seconds_simulate},
        {"seconds_estimate", report.seconds_estimate}};
    const std::string json_path = path + ".json";
    std::ofstream js = detail::open_output(json_path);
    js << summary.dump(2) << '\n';
    if (!js) {
        throw IoError("write failed: " + json_path);
    }
}

/// Read back the CSV table written by write_report (the config echo lives in
/// the JSON sidecar and is not restored here).
inline ErrorReport read_report_csv(const std::string &path) {
    std::ifstream in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty report: " + path);
    }
    ErrorReport report;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        double v[6];
        int field = 0;
        std::size_t pos = 0;
        while (field < 6) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell = line.substr(
                pos, comma == std::string::npos ? std::string::npos
                                                : comma - pos);
            try {
                v[field] = cell == "nan"
                               ? std::numeric_limits<double>::quiet_NaN()
                               : std::stod(cell);
            } catch (const std::exception &) {
                throw IoError("bad CSV cell '" + cell + "' in " + path);
            }
            ++field;
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (field != 6) {
            throw IoError("short CSV row in " + path);
        }
        report.times.push_back(v[0]);
        report.err_pol.push_back(v[1]);
        report.err_cay.push_back(v[2]);
        report.err_cc.push_back(v[3]);
        report.err_translation.push_back(v[4]);
        report.j_min.push_back(v[5]);
    }
    return report;
}

// =============================================================================
// Frame sets: binary container and CSV
// =============================================================================
//
// Binary layout ("DTMF", little-endian, version 1):
//   bytes 0..3   magic 'D' 'T' 'M' 'F'
//   u32          version (1)
//   u32          kind: 0 = complex frames (mu), 1 = real frames (nu)
//   u32          grid resolution n
//   u32          frame count
//   f64          k0
//   4 bytes      reserved (zero)
// then per frame: f64 time followed by the (2n)^2 node values in flat
// (radius-major) order; complex values are re, im pairs.

namespace detail {

inline constexpr char frame_magic[4] = {'D', 'T', 'M', 'F'};
inline constexpr std::uint32_t frame_version = 1;

template <typename T> void write_pod(std::ofstream &out, const T &v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T> T read_pod(std::ifstream &in, const std::string &path) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in) {
        throw IoError("truncated frame file: " + path);
    }
    return v;
}

struct FrameHeader {
    std::uint32_t kind = 0;
    std::uint32_t n = 0;
    std::uint32_t count = 0;
    double k0 = 0.0;
};

inline void write_frame_header(std::ofstream &out, const FrameHeader &h) {
    out.write(frame_magic, 4);
    write_pod(out, frame_version);
    write_pod(out, h.kind);
    write_pod(out, h.n);
    write_pod(out, h.count);
    write_pod(out, h.k0);
    const std::uint32_t reserved = 0;
    write_pod(out, reserved);
}

inline FrameHeader read_frame_header(std::ifstream &in,
                                     const std::string &path,
                                     std::uint32_t expected_kind) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, frame_magic, 4) != 0) {
        throw IoError("not a frame file: " + path);
    }
    const std::uint32_t version = read_pod<std::uint32_t>(in, path);
    if (version != frame_version) {
        throw IoError("unsupported frame file version in " + path);
    }
    FrameHeader h;
    h.kind = read_pod<std::uint32_t>(in, path);
    h.n = read_pod<std::uint32_t>(in, path);
    h.count = read_pod<std::uint32_t>(in, path);
    h.k0 = read_pod<double>(in, path);
    read_pod<std::uint32_t>(in, path); // reserved
    if (h.kind != expected_kind) {
        throw IoError("frame kind mismatch in " + path +
                      (expected_kind == 0 ? " (expected complex frames)"
                                          : " (expected real frames)"));
    }
    if (h.n == 0) {
        throw IoError("bad grid size in " + path);
    }
    return h;
}

} // namespace detail

inline void write_frames(const std::vector<MuFrame> &frames,
                         const std::string &path) {
    std::ofstream out = detail::open_output(path);
    detail::FrameHeader h;
    h.kind = 0;
    h.n = frames.empty() ? 0 : static_cast<std::uint32_t>(frames[0].grid.n);
    h.count = static_cast<std::uint32_t>(frames.size());
    h.k0 = frames.empty() ? 0.0 : frames[0].grid.k0;
    detail::write_frame_header(out, h);
    for (const MuFrame &f : frames) {
        detail::write_pod(out, f.time);
        for (const Complex &z : f.values) {
            detail::write_pod(out, z.real());
            detail::write_pod(out, z.imag());
        }
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

inline void write_frames(const std::vector<NuFrame> &frames,
                         const std::string &path) {
    std::ofstream out = detail::open_output(path);
    detail::FrameHeader h;
    h.kind = 1;
    h.n = frames.empty() ? 0 : static_cast<std::uint32_t>(frames[0].grid.n);
    h.count = static_cast<std::uint32_t>(frames.size());
    h.k0 = frames.empty() ? 0.0 : frames[0].grid.k0;
    detail::write_frame_header(out, h);
    for (const NuFrame &f : frames) {
        detail::write_pod(out, f.time);
        for (double v : f.values) {
            detail::write_pod(out, v);
        }
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

inline std::vector<MuFrame> read_mu_frames(const std::string &path) {
    std::ifstream in = detail::open_input(path);
    const detail::FrameHeader h = detail::read_frame_header(in, path, 0);
    const PolarGrid grid = PolarGrid::standard(h.k0, static_cast<int>(h.n));
    const int m = grid.size() * grid.size();
    std::vector<MuFrame> frames(h.count);
    for (MuFrame &f : frames) {
        f.grid = grid;
        f.time = detail::read_pod<double>(in, path);
        f.values.resize(m);
        for (Complex &z : f.values) {
            const double re = detail::read_pod<double>(in, path);
            const double im = detail::read_pod<double>(in, path);
            z = Complex(re, im);
        }
    }
    return frames;
}

inline std::vector<NuFrame> read_nu_frames(const std::string &path) {
    std::ifstream in = detail::open_input(path);
    const detail::FrameHeader h = detail::read_frame_header(in, path, 1);
    const PolarGrid grid = PolarGrid::standard(h.k0, static_cast<int>(h.n));
    const int m = grid.size() * grid.size();
    std::vector<NuFrame> frames(h.count);
    for (NuFrame &f : frames) {
        f.grid = grid;
        f.time = detail::read_pod<double>(in, path);
        f.values.resize(m);
        for (double &v : f.values) {
            v = detail::read_pod<double>(in, path);
        }
    }
    return frames;
}

/// Plain-text export of a frame set for inspection with external tools.
inline void write_frames_csv(const std::vector<NuFrame> &frames,
                             const std::string &path) {
    std::ofstream out = detail::open_output(path);
    if (!frames.empty()) {
        out << "# k0=" << detail::format_full(frames[0].grid.k0)
            << " n=" << frames[0].grid.n << " count=" << frames.size() << '\n';
    }
    out << "time,r,phi,value\n";
    for (const NuFrame &f : frames) {
        for (int i = 0; i < f.grid.size(); ++i) {
            for (int j = 0; j < f.grid.size(); ++j) {
                out << detail::format_full(f.time) << ','
                    << detail::format_full(f.grid.radii[i]) << ','
                    << detail::format_full(f.grid.angles[j]) << ','
                    << detail::format_full(f.at(i, j)) << '\n';
            }
        }
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

inline void write_frames_csv(const std::vector<MuFrame> &frames,
                             const std::string &path) {
    std::ofstream out = detail::open_output(path);
    if (!frames.empty()) {
        out << "# k0=" << detail::format_full(frames[0].grid.k0)
            << " n=" << frames[0].grid.n << " count=" << frames.size() << '\n';
    }
    out << "time,r,phi,re,im\n";
    for (const MuFrame &f : frames) {
        for (int i = 0; i < f.grid.size(); ++i) {
            for (int j = 0; j < f.grid.size(); ++j) {
                const Complex z = f.at(i, j);
                out << detail::format_full(f.time) << ','
                    << detail::format_full(f.grid.radii[i]) << ','
                    << detail::format_full(f.grid.angles[j]) << ','
                    << detail::format_full(z.real()) << ','
                    << detail::format_full(z.imag()) << '\n';
            }
        }
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

} // namespace odt
