#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "tsrate/config.hpp"
#include "tsrate/pipeline.hpp"

using namespace tsrate;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const TempDir& dir, std::size_t days = 120) {
    testutil::SyntheticSpec spec;
    spec.entities = 6;
    spec.industries = 3;
    spec.days = days;
    testutil::write_synthetic_dataset(spec, dir.file("prices.csv"), dir.file("meta.csv"));
    RunConfig cfg;
    cfg.price_csv = dir.file("prices.csv");
    cfg.meta_csv = dir.file("meta.csv");
    cfg.workspace = (dir.path() / "workspace").string();
    cfg.biased.favored_zero = "ENT0";
    cfg.biased.favored_const = "ENT3";
    cfg.arima_p_max = 1;  // keep the unit test quick
    cfg.arima_q_max = 1;
    cfg.seed = 9;
    return cfg;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t raw_lines(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

std::size_t data_lines(const fs::path& path) {
    const std::size_t n = raw_lines(path);
    return n > 0 ? n - 1 : 0;  // minus header
}

}  // namespace

TEST_CASE("config parsing") {
    const nlohmann::json j = {
        {"data", {{"price_csv", "p.csv"}, {"meta_csv", "m.csv"}}},
        {"workspace", "ws"},
        {"window", {{"n", 40}, {"d", 10}, {"stride", 2}}},
        {"perturbations", {"P1", "P3"}},
        {"systems",
         {{"arima", {{"enabled", false}}},
          {"biased", {{"favored_zero", "A"}, {"favored_const", "B"}}},
          {"random", {{"margin", 50.0}, {"seed", 7}}}}},
        {"analysis", {{"cis", {0.9, 0.6}}, {"weights", {1.0, 0.5}}, {"seed", 3}}}};
    const RunConfig cfg = parse_config(j);
    REQUIRE(cfg.n == 40);
    REQUIRE(cfg.stride == 2);
    REQUIRE_FALSE(cfg.run_arima);
    REQUIRE(cfg.perturbations ==
            std::vector<PerturbationId>{PerturbationId::P1, PerturbationId::P3});
    REQUIRE(cfg.random_cfg.margin == 50.0);
    REQUIRE(cfg.cis == std::vector<double>{0.9, 0.6});

    // unknown keys and malformed values fail loudly
    REQUIRE_THROWS_AS(parse_config({{"typo", 1}}), Error);
    REQUIRE_THROWS_AS(parse_config({{"window", {{"n", 1}}}}), Error);
    REQUIRE_THROWS_AS(parse_config({{"perturbations", {"P0"}}}), Error);
    REQUIRE_THROWS_AS(parse_config({{"perturbations", {"P1", "P1"}}}), Error);
    REQUIRE_THROWS_AS(
        parse_config({{"analysis", {{"cis", {0.9}}, {"weights", {1.0, 0.5}}}}}), Error);

    // echo keeps every resolved field
    const auto echo = config_echo(cfg);
    REQUIRE(echo["window"]["n"] == 40);
    REQUIRE(parse_config(echo).n == cfg.n);
}

TEST_CASE("pipeline end to end on a small synthetic dataset") {
    TempDir dir("pipeline_small");
    const RunConfig cfg = small_config(dir);
    const Workspace ws(cfg.workspace);

    const std::size_t windows_per_entity = 120 - cfg.n - cfg.d + 1;  // 21
    const std::size_t control_windows = 6 * windows_per_entity;

    const PrepareSummary prep = run_prepare(cfg, 2);
    REQUIRE(prep.entities == 6);
    REQUIRE(prep.control_windows == control_windows);
    REQUIRE(prep.numeric_variants == 3);
    REQUIRE(prep.images == control_windows * 4);  // P0, P3, P4, P5
    REQUIRE(prep.warnings.empty());

    REQUIRE(data_lines(ws.windows_csv(PerturbationId::P0)) == control_windows);
    REQUIRE(data_lines(ws.windows_csv(PerturbationId::P1)) == control_windows);
    REQUIRE(data_lines(ws.windows_csv(PerturbationId::P2)) == control_windows);
    REQUIRE(raw_lines(ws.exchange_dir() / "manifest.jsonl") == control_windows * 6);

    const ForecastSummary fc = run_forecast(cfg, 2);
    REQUIRE(fc.systems == 3);
    // numeric-only system covers 3 variants, the baselines cover all 6
    REQUIRE(fc.records == control_windows * 3 + 2 * control_windows * 6);

    const RateSummary rate = run_rate(cfg, 2);
    REQUIRE(rate.systems == 3);
    REQUIRE(rate.perturbations == 6);
    REQUIRE(rate.windows == control_windows);
    REQUIRE(rate.rating_rows > 0);

    // every rating lands in 1..3 and every family shows up
    const auto scores = read_scores_csv(ws.analysis_dir() / "scores.csv");
    std::set<std::string> families;
    for (const auto& s : scores) families.insert(s.family);
    for (const auto& family : metric_families()) REQUIRE(families.count(family));

    const auto rating_csv = slurp(ws.reports_dir() / "ratings.csv");
    REQUIRE_FALSE(rating_csv.empty());
    const auto rows = rating_rows_from_scores(scores, cfg.rating_level);
    for (const auto& row : rows)
        for (const auto& [system, rating] : row.ratings) {
            REQUIRE(rating >= 1);
            REQUIRE(rating <= 3);
        }

    // numeric-only system is absent from image-perturbation rating rows
    for (const auto& row : rows)
        if (row.perturbation == "P3" || row.perturbation == "P4" || row.perturbation == "P5")
            REQUIRE_FALSE(row.ratings.count(kArimaSystemId));

    // the biased system's favored entity has zero worst-case residual
    bool checked = false;
    for (const auto& line : read_csv((ws.analysis_dir() / "residuals.csv").string())) {
        if (line.size() >= 6 && line[1] == kBiasedSystemId && line[3] == "ENT0") {
            REQUIRE(parse_double(line[5], "r_max") == 0.0);
            checked = true;
        }
    }
    REQUIRE(checked);

    // rerunning rate is byte-identical
    const std::string first_scores = slurp(ws.analysis_dir() / "scores.csv");
    const std::string first_ratings = slurp(ws.reports_dir() / "ratings.csv");
    run_rate(cfg, 2);
    REQUIRE(slurp(ws.analysis_dir() / "scores.csv") == first_scores);
    REQUIRE(slurp(ws.reports_dir() / "ratings.csv") == first_ratings);

    // report re-renders the same tables from persisted scores
    fs::remove_all(ws.reports_dir());
    REQUIRE(run_report(cfg) == rows.size());
    REQUIRE(slurp(ws.reports_dir() / "ratings.csv") == first_ratings);
}

TEST_CASE("external predictions join the rating") {
    TempDir dir("pipeline_external");
    RunConfig cfg = small_config(dir);
    cfg.perturbations = {PerturbationId::P1};  // numeric only, keeps it fast
    cfg.run_arima = false;

    REQUIRE(run_prepare(cfg, 2).control_windows > 0);

    // build an external predictions file straight from the manifest
    const Workspace ws(cfg.workspace);
    std::ifstream manifest(ws.exchange_dir() / "manifest.jsonl");
    std::string line;
    std::ofstream preds(dir.file("ext.jsonl"));
    while (std::getline(manifest, line)) {
        const auto j = nlohmann::json::parse(line);
        std::ifstream input(ws.root / j.at("input_csv").get<std::string>());
        std::vector<double> values;
        double v;
        while (input >> v) values.push_back(v);
        preds << "{\"window_id\":\"" << j.at("window_id").get<std::string>()
              << "\",\"perturbation\":\"" << j.at("perturbation").get<std::string>()
              << "\",\"predictions\":[";
        for (std::size_t i = 0; i < cfg.d; ++i) {
            if (i) preds << ",";
            preds << format_double(values.back());  // persistence forecast
        }
        preds << "]}\n";
    }
    preds.close();

    cfg.externals.push_back({"S_ext", dir.file("ext.jsonl")});
    const ForecastSummary fc = run_forecast(cfg, 2);
    REQUIRE(fc.systems == 3);  // biased, random, external

    const RateSummary rate = run_rate(cfg, 2);
    REQUIRE(rate.systems == 3);
    const auto scores = read_scores_csv(ws.analysis_dir() / "scores.csv");
    bool found_external = false;
    for (const auto& s : scores) found_external |= s.system_id == "S_ext";
    REQUIRE(found_external);

    // a broken external file only disables that system
    testutil::write_file(dir.file("broken.jsonl"), "{\"window_id\":\"nope\"}\n");
    cfg.externals = {{"S_bad", dir.file("broken.jsonl")}};
    const ForecastSummary fc2 = run_forecast(cfg, 2);
    REQUIRE(fc2.systems == 2);
    REQUIRE_FALSE(fc2.warnings.empty());
}

TEST_CASE("file-based and heuristic sentiment providers are interchangeable") {
    TempDir dir("sentiment_providers");
    RunConfig cfg = small_config(dir, 104);  // 5 windows per entity
    cfg.perturbations = {PerturbationId::P5};
    cfg.run_arima = false;
    cfg.run_random = false;

    run_prepare(cfg, 2);
    const Workspace ws(cfg.workspace);
    const auto control = read_windows_csv(ws.windows_csv(PerturbationId::P0), cfg.n, cfg.d);

    // dump the heuristic's labels to a file and rerun with the file provider
    std::ofstream labels(dir.file("labels.jsonl"));
    for (const auto& w : control)
        labels << "{\"window_id\":\"" << w.window_id << "\",\"label\":"
               << static_cast<int>(heuristic_sentiment(w.input, cfg.sentiment_tau))
               << "}\n";
    labels.close();

    std::map<std::string, std::string> first_images;
    for (const auto& entry : fs::directory_iterator(ws.images_dir()))
        first_images[entry.path().filename().string()] = slurp(entry.path());

    cfg.sentiment_provider = "file";
    cfg.sentiment_file = dir.file("labels.jsonl");
    run_prepare(cfg, 2);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(ws.images_dir())) {
        REQUIRE(first_images.at(entry.path().filename().string()) == slurp(entry.path()));
        ++compared;
    }
    REQUIRE(compared == first_images.size());
}

TEST_CASE("prepare rejects unusable inputs") {
    TempDir dir("pipeline_errors");
    RunConfig cfg;
    cfg.price_csv = dir.file("missing.csv");
    cfg.meta_csv = dir.file("missing_meta.csv");
    cfg.workspace = (dir.path() / "ws").string();
    REQUIRE_THROWS_AS(run_prepare(cfg, 1), Error);

    // all series too short: hard error, not a silent empty workspace
    testutil::write_file(dir.file("meta.csv"), "entity_id,industry\nAAA,tech\n");
    testutil::write_file(dir.file("prices.csv"),
                         "date,entity_id,adj_close\n2024-01-01,AAA,10\n");
    cfg.price_csv = dir.file("prices.csv");
    cfg.meta_csv = dir.file("meta.csv");
    try {
        run_prepare(cfg, 1);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Validation);
    }
}

#ifdef TSRATE_CLI_PATH
namespace {

int cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd \"" + cwd.string() + "\" && " + args +
                            " > cli_out.log 2> cli_err.log";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli exit codes and workspace override") {
    TempDir dir("cli_codes");
    const std::string exe = std::string("\"") + TSRATE_CLI_PATH + "\"";

    // price row referencing an entity with no metadata: validation, exit 2
    testutil::write_file(dir.file("meta.csv"), "entity_id,industry\nAAA,tech\n");
    testutil::write_file(dir.file("prices.csv"),
                         "date,entity_id,adj_close\n2024-01-01,GHOST,10\n");
    nlohmann::json j;
    j["data"]["price_csv"] = dir.file("prices.csv");
    j["data"]["meta_csv"] = dir.file("meta.csv");
    j["workspace"] = "ws";
    testutil::write_file(dir.file("config.json"), j.dump());
    REQUIRE(cli(exe + " prepare --config config.json", dir.path()) == 2);

    // missing config file: also a validation failure
    REQUIRE(cli(exe + " prepare --config nope.json", dir.path()) == 2);

    // TSRATE_WORKSPACE redirects the workspace; rating a small dataset there
    testutil::SyntheticSpec spec;
    spec.entities = 2;
    spec.industries = 2;
    spec.days = 104;
    testutil::write_synthetic_dataset(spec, dir.file("prices2.csv"), dir.file("meta2.csv"));
    nlohmann::json ok;
    ok["data"]["price_csv"] = dir.file("prices2.csv");
    ok["data"]["meta_csv"] = dir.file("meta2.csv");
    ok["workspace"] = "ignored";
    ok["window"] = {{"n", 80}, {"d", 20}, {"stride", 1}};
    ok["perturbations"] = {"P1"};
    ok["systems"]["arima"]["enabled"] = false;
    ok["systems"]["biased"]["favored_zero"] = "ENT0";
    ok["systems"]["biased"]["favored_const"] = "ENT1";
    testutil::write_file(dir.file("config2.json"), ok.dump());
    const std::string env = "TSRATE_WORKSPACE=\"" + (dir.path() / "elsewhere").string() + "\" ";
    REQUIRE(cli(env + exe + " prepare --config config2.json --threads 2", dir.path()) == 0);
    REQUIRE(fs::exists(dir.path() / "elsewhere" / "windows" / "windows_P0.csv"));
    REQUIRE_FALSE(fs::exists(dir.path() / "ignored"));
    REQUIRE(cli(env + exe + " forecast --config config2.json", dir.path()) == 0);
    REQUIRE(cli(env + exe + " rate --config config2.json", dir.path()) == 0);
    REQUIRE(fs::exists(dir.path() / "elsewhere" / "reports" / "ratings.csv"));

    // rate before forecast in a fresh workspace: validation, exit 2
    const std::string env2 = "TSRATE_WORKSPACE=\"" + (dir.path() / "fresh").string() + "\" ";
    REQUIRE(cli(env2 + exe + " rate --config config2.json", dir.path()) == 2);
}
#endif

TEST_CASE("rate from a score table runs the rating in isolation") {
    TempDir dir("from_scores");
    testutil::write_file(dir.file("scores.csv"),
                         "metric,perturbation,system,score\n"
                         "MASE,P0,Sv1,3.68\nMASE,P0,Sa,3.79\nMASE,P0,Sv2,3.89\n"
                         "MASE,P0,Sr,86.45\nMASE,P0,Sb,947.56\n");
    const auto out = dir.path() / "reports";
    REQUIRE(rate_from_scores(dir.file("scores.csv"), out, 3) == 1);
    const std::string table = slurp(out / "rating_MASE.txt");
    REQUIRE(table.find("Sv1: 1") != std::string::npos);
    REQUIRE(table.find("Sb: 3") != std::string::npos);
    const std::string csv = slurp(out / "ratings.csv");
    REQUIRE(csv.find("MASE,P0,Sr,86.45") != std::string::npos);
}
