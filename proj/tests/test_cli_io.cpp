#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "morsekit/commands.hpp"
#include "morsekit/config.hpp"
#include "morsekit/errors.hpp"
#include "morsekit/noise.hpp"
#include "morsekit/trace_io.hpp"

using namespace morsekit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("cli_io_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("morsekit");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

const std::string kSimBody = "schema_version = 1\n"
                             "model.orientation = 0.346\n"
                             "model.atoms = 0.0881503\n"
                             "model.gamma_com_hz = 9.4\n"
                             "model.center_hz = 325250\n"
                             "model.split_hz = 22\n"
                             "grid.start_hz = 325150\n"
                             "grid.stop_hz = 325350\n"
                             "grid.points = 501\n"
                             "output.trace = t.csv\n";

fs::path config_dir() { return fs::path(MORSEKIT_CONFIG_DIR); }

} // namespace

TEST_CASE("minimal config text parses with documented defaults") {
    const RunConfig cfg = parse_config("schema_version = 1\n", "inline");
    CHECK(cfg.schema_version == 1);
    CHECK(cfg.origin == "inline");
    CHECK(cfg.digest == fnv1a_hex("schema_version = 1\n"));
    CHECK(cfg.grid.automatic);
    CHECK(cfg.grid.points == 2001);
    CHECK(cfg.grid.span_factor == 10.0);
    CHECK(cfg.noise.kind == NoiseSpec::Kind::none);
    CHECK_FALSE(cfg.noise.seed.has_value());
    CHECK(cfg.output.trace == "trace.csv");
    CHECK(cfg.output.report == "report.json");
    CHECK(cfg.fit.auto_init);
    CHECK(cfg.fit.restarts == 8);
    CHECK_FALSE(cfg.schedule_given);
    CHECK(cfg.species.hyperfine_splitting_hz == doctest::Approx(9.19263177e9));
}

TEST_CASE("malformed or contradictory configs raise ConfigError") {
    auto bad = [](const std::string& body) {
        CHECK_THROWS_AS(parse_config("schema_version = 1\n" + body, "inline"),
                        ConfigError);
    };
    bad("no.such.key = 1\n");
    bad("model.f = 4\nmodel.f = 4\n");                      // duplicate
    bad("model.f = banana\n");                              // bad number
    bad("model.f =\n");                                     // empty value
    bad("model.f 4\n");                                     // missing '='
    bad("noise.level = 0.01\n");                            // level without kind
    bad("noise.level = -0.5\nnoise.kind = gaussian\n");     // negative level
    bad("noise.kind = pink\n");                             // unknown kind
    bad("model.epsilon = 0.5\nmodel.orientation = 0.5\n");  // exclusive pair
    bad("model.n4 = 1\nmodel.atoms = 2\n");                 // exclusive pair
    bad("beam.intensity_w_m2 = 1\nbeam.intensity_mw_cm2 = 1\n");
    bad("cell.gradient_mg_per_m = 1\ncell.gradient_t_per_m = 1\n");
    bad("grid.start_hz = 10\n");                            // start without stop
    bad("fit.free = scale,bogus\n");
    bad("pulse.segment = 0.1 18\n");                        // missing drive flag
    bad("pulse.segment = 0.1 18 maybe\n");                  // bad drive flag
    bad("pulse.segment = 0.1 18 on extra\n");               // bad trailing token

    CHECK_THROWS_AS(parse_config("", "inline"), ConfigError); // no schema_version
    CHECK_THROWS_AS(parse_config("schema_version = 2\n", "inline"), ConfigError);

    try {
        parse_config("schema_version = 1\nwhat = ever\n", "marker-origin");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("marker-origin") != std::string::npos);
    }
}

TEST_CASE("orientation and atom-count keys are translated into model fields") {
    const RunConfig cfg = parse_config("schema_version = 1\n"
                                       "model.orientation = 0.346\n",
                                       "inline");
    CHECK(cfg.model.epsilon == doctest::Approx(0.801632504772).epsilon(1e-9));

    const RunConfig atoms = parse_config("schema_version = 1\n"
                                         "model.epsilon = 0.5\n"
                                         "model.atoms = 2.0\n",
                                         "inline");
    const double ladder_sum = (1.0 - std::pow(0.5, 9)) / (1.0 - 0.5);
    CHECK(atoms.total_atoms == 2.0);
    CHECK(atoms.model.n4 == doctest::Approx(2.0 / ladder_sum).epsilon(1e-12));
}

TEST_CASE("pulse schedules parse segment by segment") {
    const RunConfig cfg = parse_config("schema_version = 1\n"
                                       "pulse.segment = 0.0010 788 off\n"
                                       "pulse.segment = 0.0005 20 on probe\n"
                                       "pulse.chi_rad_s = 2.5\n"
                                       "pulse.resonance_hz = 325250\n",
                                       "inline");
    REQUIRE(cfg.schedule_given);
    REQUIRE(cfg.schedule.segments.size() == 2);
    CHECK(cfg.schedule.segments[0].duration_s == 0.0010);
    CHECK(cfg.schedule.segments[0].gamma_total_hz == 788.0);
    CHECK_FALSE(cfg.schedule.segments[0].drive_on);
    CHECK_FALSE(cfg.schedule.segments[0].probe_window);
    CHECK(cfg.schedule.segments[1].drive_on);
    CHECK(cfg.schedule.segments[1].probe_window);
    CHECK(cfg.schedule.chi_rad_s == 2.5);
    CHECK(cfg.schedule.resonance_hz == 325250.0);
}

TEST_CASE("fit keys override the initialized problem") {
    const RunConfig cfg = parse_config("schema_version = 1\n"
                                       "fit.auto_init = false\n"
                                       "fit.free = scale,epsilon,omega_center\n"
                                       "fit.start.omega_center = 100\n"
                                       "fit.lower.gamma_com = 1\n"
                                       "fit.upper.gamma_com = 50\n"
                                       "fit.poisson_weights = true\n"
                                       "fit.weight_floor = 0.5\n"
                                       "fit.parametrize_orientation = true\n"
                                       "fit.restarts = 3\n"
                                       "fit.restart_seed = 99\n"
                                       "fit.max_iterations = 77\n",
                                       "inline");
    CHECK_FALSE(cfg.fit.auto_init);
    const FitProblem problem = cfg.fit.apply(FitProblem{});
    CHECK(problem.free ==
          std::array<bool, fit_param_count>{true, true, false, false, true, false});
    CHECK(problem.start[4] == 100.0);
    CHECK(problem.bounds[2].first == 1.0);
    CHECK(problem.bounds[2].second == 50.0);
    CHECK(problem.poisson_weights);
    CHECK(problem.weight_floor == 0.5);
    CHECK(problem.parametrize_orientation);
    CHECK(problem.restarts == 3);
    CHECK(problem.restart_seed == 99);
    CHECK(problem.max_iterations == 77);

    const RunConfig crossed = parse_config("schema_version = 1\n"
                                           "fit.lower.scale = 10\n"
                                           "fit.upper.scale = 1\n",
                                           "inline");
    CHECK_THROWS_AS(crossed.fit.apply(FitProblem{}), ConfigError);
}

TEST_CASE("the shipped example configs load and carry the expected settings") {
    const RunConfig fig1 = load_config(config_dir() / "fig1.cfg");
    CHECK_FALSE(fig1.grid.automatic);
    CHECK(fig1.grid.points == 2001);
    CHECK(fig1.grid.start_hz == 325000.0);
    CHECK(fig1.grid.stop_hz == 325500.0);
    CHECK(fig1.model.gamma_com_hz == 9.4);
    CHECK(fig1.model.gamma_pump_hz == 0.0);
    CHECK(fig1.model.epsilon == doctest::Approx(0.801632504772).epsilon(1e-9));
    CHECK(fig1.output.trace == "fig1.csv");

    const RunConfig fig2b = load_config(config_dir() / "fig2b.cfg");
    CHECK(fig2b.model.gamma_pump_hz == 5.5);

    const RunConfig fig5 = load_config(config_dir() / "fig5.cfg");
    REQUIRE(fig5.schedule_given);
    REQUIRE(fig5.schedule.segments.size() == 4);
    CHECK(fig5.schedule.period_s() == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(fig5.schedule.resonance_hz == 325250.0);
    CHECK_FALSE(fig5.grid.automatic);

    const RunConfig est = load_config(config_dir() / "estimate.cfg");
    REQUIRE(est.estimate.measured_gradient_coefficient.has_value());
    CHECK(*est.estimate.measured_gradient_coefficient == 0.0158);
    CHECK(est.estimate.beam.intensity_w_m2 == 10.0); // 1 mW/cm^2
    CHECK(est.estimate.pump_wavelength_m == 894e-9);
    CHECK(est.estimate.cell.bias_gauss == 0.929);
}

TEST_CASE("trace CSV round trip preserves samples, kind, and annotations") {
    SpectrumTrace trace;
    trace.kind = TraceKind::quadrature_pair;
    trace.frequency_hz = {-5.5, 0.25, 17.125, 1000000.5};
    trace.value = {-0.125, 0.0, 3.5e-09, 2.25e10};
    trace.meta["config"] = "deadbeefdeadbeef";
    trace.meta["seed"] = "42";

    const std::string csv = to_csv(trace);
    CHECK(csv.rfind("# morsekit ", 0) == 0);
    CHECK(csv.find("# kind = quadrature_pair\n") != std::string::npos);
    CHECK(csv.find("frequency_hz,value\n") != std::string::npos);

    const SpectrumTrace parsed = parse_csv(csv);
    REQUIRE(parsed.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(parsed.frequency_hz[i] == trace.frequency_hz[i]);
        CHECK(parsed.value[i] == trace.value[i]);
    }
    CHECK(parsed.kind == TraceKind::quadrature_pair);
    CHECK(parsed.meta.at("config") == "deadbeefdeadbeef");
    CHECK(parsed.meta.at("seed") == "42");

    // re-rendering the parsed trace is byte-identical
    CHECK(to_csv(parsed) == csv);
}

TEST_CASE("trace CSV writes are atomic and fingerprinted") {
    const fs::path dir = scratch("csv_atomic");
    SpectrumTrace trace;
    trace.frequency_hz = {1.0, 2.0, 3.0};
    trace.value = {0.5, 1.5, 0.25};
    const std::string digest = write_csv(dir / "t.csv", trace);
    CHECK(digest == fnv1a_hex(read_file(dir / "t.csv")));

    std::size_t entries = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        ++entries;
        CHECK(entry.path().extension() != ".tmp");
    }
    CHECK(entries == 1);

    const SpectrumTrace back = read_csv(dir / "t.csv");
    REQUIRE(back.size() == 3);
    CHECK(back.value[2] == 0.25);
}

TEST_CASE("the CSV reader rejects malformed input with ParseError") {
    auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(parse_csv(text), ParseError);
    };
    bad("");
    bad("bogus\n1,2\n");                             // wrong header
    bad("frequency_hz,value\n1,2,3\n");              // three fields
    bad("frequency_hz,value\n1\n");                  // one field
    bad("frequency_hz,value\na,b\n");                // not numbers
    bad("frequency_hz,value\n1,2\n1,3\n");           // non-increasing
    bad("frequency_hz,value\n2,1\n1,1\n");           // decreasing
    bad("frequency_hz,value\n1,nan\n");              // non-finite
    bad("frequency_hz,value\n1,inf\n");              // non-finite
    bad("frequency_hz,value\n1, 2\n");               // embedded space
    bad("# kind = banana\nfrequency_hz,value\n1,2\n"); // unknown kind
}

TEST_CASE("FNV-1a fingerprints match the published test vectors") {
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("morsekit").size() == 16);
}

TEST_CASE("gaussian trace noise is seeded, scaled, and sign-preserving") {
    GaussianSampler a(7), b(7), c(8);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 5; ++i) {
        const double va = a(), vb = b(), vc = c();
        all_equal = all_equal && (va == vb);
        any_differ = any_differ || (va != vc);
    }
    CHECK(all_equal);
    CHECK(any_differ);

    SpectrumTrace trace;
    for (int i = 0; i < 20000; ++i) {
        trace.frequency_hz.push_back(static_cast<double>(i));
        trace.value.push_back(10.0);
    }
    const SpectrumTrace noisy = add_noise(trace, 0.1, 123);
    const SpectrumTrace again = add_noise(trace, 0.1, 123);
    double mean = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        CHECK(noisy.value[i] == again.value[i]);
        mean += noisy.value[i];
    }
    mean /= static_cast<double>(noisy.size());
    double var = 0.0;
    for (double v : noisy.value) var += (v - mean) * (v - mean);
    var /= static_cast<double>(noisy.size() - 1);
    CHECK(mean == doctest::Approx(10.0).epsilon(0.005));
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(0.05)); // 0.1 * max
    CHECK(noisy.frequency_hz == trace.frequency_hz);

    SpectrumTrace zeros;
    zeros.frequency_hz = {0.0, 1.0, 2.0, 3.0};
    zeros.value = {0.0, 0.0, 0.0, 1.0};
    const SpectrumTrace jittered = add_noise(zeros, 0.5, 3);
    bool has_negative = false;
    for (double v : jittered.value) has_negative = has_negative || v < 0.0;
    CHECK(has_negative);

    const SpectrumTrace untouched = add_noise(zeros, 0.0, 3);
    CHECK(untouched.value == zeros.value);
    CHECK_THROWS_AS(add_noise(zeros, -0.1, 3), DomainError);
}

TEST_CASE("simulate writes a parseable trace plus a provenance manifest") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg_path = dir / "sim.cfg";
    write_file(cfg_path, kSimBody);

    CHECK(run({"simulate", "--config", cfg_path.string(), "--out", dir.string()}) == 0);
    REQUIRE(fs::exists(dir / "t.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const RunConfig cfg = load_config(cfg_path);
    const SpectrumTrace trace = read_csv(dir / "t.csv");
    CHECK(trace.size() == 501);
    CHECK(trace.kind == TraceKind::mors_power);
    CHECK(trace.meta.at("config") == cfg.digest);
    CHECK(trace.frequency_hz.front() == 325150.0);
    CHECK(trace.frequency_hz.back() == 325350.0);

    const json manifest = json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest.at("tool") == "morsekit");
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("config").at("digest") == cfg.digest);
    CHECK(manifest.at("outputs").at("t.csv") ==
          fnv1a_hex(read_file(dir / "t.csv")));
    CHECK(manifest.at("seed").is_null());
}

TEST_CASE("noisy simulation reproduces bytes per seed and honors --seed") {
    const fs::path dir = scratch("noisy");
    const std::string noisy_cfg = kSimBody + "noise.kind = gaussian\n"
                                             "noise.level = 0.02\n"
                                             "noise.seed = 7\n";
    write_file(dir / "n.cfg", noisy_cfg);

    CHECK(run({"simulate", "--config", (dir / "n.cfg").string(), "--out",
               (dir / "a").string()}) == 0);
    CHECK(run({"simulate", "--config", (dir / "n.cfg").string(), "--out",
               (dir / "b").string()}) == 0);
    CHECK(run({"simulate", "--config", (dir / "n.cfg").string(), "--out",
               (dir / "c").string(), "--seed", "8"}) == 0);

    const std::string bytes_a = read_file(dir / "a" / "t.csv");
    CHECK(bytes_a == read_file(dir / "b" / "t.csv"));
    CHECK(bytes_a != read_file(dir / "c" / "t.csv"));
    CHECK(parse_csv(bytes_a).meta.at("seed") == "7");

    const json manifest = json::parse(read_file(dir / "c" / "manifest.json"));
    CHECK(manifest.at("seed") == 8);

    // gaussian noise without any seed is a configuration error
    write_file(dir / "unseeded.cfg", kSimBody + "noise.kind = gaussian\n"
                                                "noise.level = 0.02\n");
    CHECK(run({"simulate", "--config", (dir / "unseeded.cfg").string(), "--out",
               (dir / "d").string()}) == 2);
}

TEST_CASE("fit command consumes a simulated trace and writes a full report") {
    const fs::path dir = scratch("fit_cmd");
    write_file(dir / "sim.cfg", kSimBody);
    REQUIRE(run({"simulate", "--config", (dir / "sim.cfg").string(), "--out",
                 dir.string()}) == 0);

    write_file(dir / "fit.cfg", "schema_version = 1\n");
    CHECK(run({"fit", "--config", (dir / "fit.cfg").string(), "--trace",
               (dir / "t.csv").string(), "--out", dir.string()}) == 0);

    REQUIRE(fs::exists(dir / "report.json"));
    const json report = json::parse(read_file(dir / "report.json"));
    CHECK(report.at("command") == "fit");
    CHECK(report.at("result").at("converged") == true);
    CHECK(report.at("result").at("relative_residual").get<double>() < 1e-6);
    const double eps = report.at("result").at("parameters").at("epsilon").get<double>();
    CHECK(eps == doctest::Approx(0.801632504772).epsilon(1e-2));
    const double p = report.at("result").at("orientation").get<double>();
    CHECK(p == doctest::Approx(0.346).epsilon(1e-2));
    CHECK(report.at("trace").at("digest") ==
          fnv1a_hex(read_file(dir / "t.csv")));

    const SpectrumTrace model_curve = read_csv(dir / "model.csv");
    const SpectrumTrace residual = read_csv(dir / "residual.csv");
    CHECK(model_curve.size() == 501);
    CHECK(residual.size() == 501);
}

TEST_CASE("pulsed command writes the spectrum and a diagnostics CSV") {
    const fs::path dir = scratch("pulsed_cmd");
    const std::string body = "schema_version = 1\n"
                             "pulse.segment = 0.004 21 on probe\n"
                             "pulse.resonance_hz = 1000\n"
                             "grid.start_hz = 900\n"
                             "grid.stop_hz = 1100\n"
                             "grid.points = 101\n";
    write_file(dir / "p.cfg", body);
    CHECK(run({"pulsed", "--config", (dir / "p.cfg").string(), "--out",
               dir.string()}) == 0);

    const json report = json::parse(read_file(dir / "report.json"));
    CHECK(report.at("schedule").at("segments") == 1);
    CHECK(report.at("summary").at("width_hz").get<double>() ==
          doctest::Approx(21.0).epsilon(0.05));
    CHECK(report.at("summary").at("peak_hz").get<double>() ==
          doctest::Approx(1000.0).epsilon(1e-6));
    CHECK(report.at("diagnostics").at("max_cycles").get<int>() >= 1);

    const std::string diag = read_file(dir / "diagnostics.csv");
    CHECK(diag.rfind("# morsekit ", 0) == 0);
    CHECK(diag.find("frequency_hz,cycles,last_delta\n") != std::string::npos);

    // pulsed requires an explicit grid and at least one segment
    write_file(dir / "nogrid.cfg", "schema_version = 1\n"
                                   "pulse.segment = 0.004 21 on probe\n");
    CHECK(run({"pulsed", "--config", (dir / "nogrid.cfg").string(), "--out",
               dir.string()}) == 2);
    write_file(dir / "noseg.cfg", "schema_version = 1\n"
                                  "grid.start_hz = 900\n"
                                  "grid.stop_hz = 1100\n");
    CHECK(run({"pulsed", "--config", (dir / "noseg.cfg").string(), "--out",
               dir.string()}) == 2);
}

TEST_CASE("estimate command reports the order-of-magnitude numbers") {
    const fs::path dir = scratch("estimate_cmd");
    CHECK(run({"estimate", "--config", (config_dir() / "estimate.cfg").string(),
               "--out", dir.string()}) == 0);

    const json report = json::parse(read_file(dir / "estimate.json"));
    CHECK(report.at("photon_scattering").at("far_detuned_hz").get<double>() ==
          doctest::Approx(100.4917).epsilon(1e-3));
    CHECK(report.at("gradient_broadening").at("coefficient_hz_m2_per_mg2").get<double>() ==
          doctest::Approx(0.02411828175172659).epsilon(1e-9));
    CHECK(report.at("resolution").at("threshold").get<double>() ==
          doctest::Approx(1.2315e-3).epsilon(1e-3));
    CHECK(report.at("resolution").at("resolved") == true);
    CHECK(report.at("critical_density_cm3").get<double>() ==
          doctest::Approx(2.1534e10).epsilon(1e-3));
    REQUIRE(report.at("manifolds").size() == 2);
    CHECK(report.at("manifolds")[0].at("g_factor").get<double>() ==
          doctest::Approx(0.24993835939379236).epsilon(1e-12));
    CHECK(report.at("manifolds")[1].at("g_factor").get<double>() ==
          doctest::Approx(-0.25074191060049555).epsilon(1e-12));

    // a missing required input is a config error
    write_file(dir / "partial.cfg", "schema_version = 1\n"
                                    "beam.wavelength_m = 852e-9\n");
    CHECK(run({"estimate", "--config", (dir / "partial.cfg").string(), "--out",
               dir.string()}) == 2);
}

TEST_CASE("CLI failure modes map to the documented exit codes") {
    const fs::path dir = scratch("exit_codes");

    CHECK(run({}) == 2);                                   // missing subcommand
    CHECK(run({"simulate"}) == 2);                         // missing --config
    CHECK(run({"simulate", "--config", "does_not_exist.cfg"}) == 2);
    CHECK(run({"simulate", "--config", "x.cfg", "--bogus"}) == 2);

    // malformed trace CSV: parse error, exit 3
    write_file(dir / "fit.cfg", "schema_version = 1\n");
    write_file(dir / "junk.csv", "this is not a trace\n");
    CHECK(run({"fit", "--config", (dir / "fit.cfg").string(), "--trace",
               (dir / "junk.csv").string(), "--out", dir.string()}) == 3);

    // a flat (all-zero) trace defeats peak detection: estimation error, exit 5
    write_file(dir / "flat.cfg", "schema_version = 1\n"
                                 "model.epsilon = 1.0\n"
                                 "model.gamma_com_hz = 9.4\n"
                                 "model.center_hz = 1000\n"
                                 "grid.start_hz = 900\n"
                                 "grid.stop_hz = 1100\n"
                                 "grid.points = 101\n");
    REQUIRE(run({"simulate", "--config", (dir / "flat.cfg").string(), "--out",
                 dir.string()}) == 0);
    const SpectrumTrace flat = read_csv(dir / "trace.csv");
    for (double v : flat.value) CHECK(v == 0.0);
    CHECK(run({"fit", "--config", (dir / "fit.cfg").string(), "--trace",
               (dir / "trace.csv").string(), "--out", dir.string()}) == 5);
}
