#include "physcad/bench/commands.hpp"
#include "physcad/bench/config.hpp"
#include "physcad/bench/report.hpp"
#include "physcad/render.hpp"
#include "physcad/validators.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace physcad;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
}

struct RunFlags {
    std::string config;
    std::string cases, backend, provider, model, endpoint, api_key_env, mock_script, out;
    std::vector<std::string> case_ids;
    std::vector<double> geom_scales, force_scales, sf_range;
    int runs = 0, max_iters = 0, resolution = 0, parallel = 0, render_size = 0;
    std::uint64_t seed = 0;
    bool disable_fea_feedback = false, single_agent = false, no_artifacts = false;
};

bench::BenchConfig resolve(const RunFlags& f, const CLI::App& app)
{
    bench::BenchConfig c;
    if (!f.config.empty())
        c = bench::config_from_json(nlohmann::json::parse(slurp(f.config)));
    auto set = [&](const char* flag, auto& field, const auto& value) {
        if (app.count(flag))
            field = value;
    };
    set("--cases", c.cases, f.cases);
    set("--case", c.case_ids, f.case_ids);
    set("--backend", c.backend, f.backend);
    set("--provider", c.provider, f.provider);
    set("--model", c.model, f.model);
    set("--endpoint", c.endpoint, f.endpoint);
    set("--api-key-env", c.api_key_env, f.api_key_env);
    set("--mock-script", c.mock_script, f.mock_script);
    set("--out", c.out, f.out);
    set("--runs", c.runs, f.runs);
    set("--max-iters", c.max_iterations, f.max_iters);
    set("--resolution", c.resolution, f.resolution);
    set("--parallel", c.parallel, f.parallel);
    set("--seed", c.seed, f.seed);
    set("--render-size", c.render_size, f.render_size);
    set("--geom-scales", c.geom_scales, f.geom_scales);
    set("--force-scales", c.force_scales, f.force_scales);
    if (app.count("--sf-range"))
        c.sf_range = {f.sf_range.at(0), f.sf_range.at(1)};
    if (f.disable_fea_feedback)
        c.fea_feedback = false;
    if (f.single_agent)
        c.single_agent = true;
    if (f.no_artifacts)
        c.save_artifacts = false;
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Physics-in-the-loop CAD design benchmark"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-cases", "Write the built-in load cases and the variant manifest");
    std::string gen_out = "cases";
    gen->add_option("--out", gen_out, "Output directory");

    auto* run = app.add_subcommand("run", "Run the benchmark and append to <out>/results.jsonl");
    RunFlags rf;
    run->add_option("--config", rf.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    run->add_option("--cases", rf.cases, "builtin, a case file, or a directory of case files");
    run->add_option("--case", rf.case_ids, "Only these problem ids (repeatable)");
    run->add_option("--backend", rf.backend, "heuristic | mock | remote");
    run->add_option("--provider", rf.provider, "Remote wire format: generic | anthropic | openai");
    run->add_option("--model", rf.model, "Model id recorded in results and sent to the endpoint");
    run->add_option("--endpoint", rf.endpoint, "Remote endpoint URL");
    run->add_option("--api-key-env", rf.api_key_env, "Environment variable holding the credential");
    run->add_option("--mock-script", rf.mock_script, "Scripted responses for the mock backend");
    run->add_option("--runs", rf.runs, "Runs per configuration");
    run->add_option("--max-iters", rf.max_iters, "Iteration cap per run");
    run->add_option("--resolution", rf.resolution, "Voxels along the longest domain axis");
    run->add_option("--out", rf.out, "Output directory");
    run->add_option("--parallel", rf.parallel, "Worker threads");
    run->add_option("--seed", rf.seed, "Base seed");
    run->add_option("--render-size", rf.render_size, "Rendered view size in pixels");
    run->add_option("--geom-scales", rf.geom_scales, "Geometric scale factors");
    run->add_option("--force-scales", rf.force_scales, "Force scale factors");
    run->add_option("--sf-range", rf.sf_range, "Target safety factor range lo hi")->expected(2);
    run->add_flag("--disable-fea-feedback", rf.disable_fea_feedback, "Keep solver output out of the prompts");
    run->add_flag("--single-agent", rf.single_agent, "One engineer agent instead of the four-role team");
    run->add_flag("--no-artifacts", rf.no_artifacts, "Skip transcripts, programs and renders");

    auto* rep = app.add_subcommand("report", "Summarize a results file");
    std::string rep_in;
    std::string rep_json;
    rep->add_option("results", rep_in, "results.jsonl")->required()->check(CLI::ExistingFile);
    rep->add_option("--json", rep_json, "Also write the report as JSON here");

    auto* st = app.add_subcommand("stats", "Significance tests between result sets");
    std::vector<std::string> st_in;
    std::string st_json;
    st->add_option("results", st_in, "One file per group (a single file is split by model)")
        ->required()
        ->check(CLI::ExistingFile);
    st->add_option("--json", st_json, "Also write the test results as JSON here");

    auto* rd = app.add_subcommand("render", "Render a design program or STL against a load case");
    std::string rd_case, rd_program, rd_stl, rd_out = ".", rd_format = "png";
    std::vector<std::string> rd_views;
    int rd_size = 512, rd_res = 48;
    rd->add_option("--case", rd_case, "Load case file")->required()->check(CLI::ExistingFile);
    auto* prog_opt = rd->add_option("--program", rd_program, "Design program (JSON)")->check(CLI::ExistingFile);
    auto* stl_opt = rd->add_option("--stl", rd_stl, "STL file")->check(CLI::ExistingFile);
    prog_opt->excludes(stl_opt);
    rd->add_option("--view", rd_views, "+x -x +y -y +z -z iso (repeatable; default +x +y +z iso)");
    rd->add_option("--size", rd_size, "Image size in pixels");
    rd->add_option("--resolution", rd_res, "Voxel resolution for the surface");
    rd->add_option("--format", rd_format, "png | ppm")->check(CLI::IsMember({"png", "ppm"}));
    rd->add_option("--out", rd_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto r = bench::cmd_gen_cases(gen_out);
            fmt::print("wrote {} cases and {} ({} configurations)\n", r.case_files.size(), r.manifest.string(),
                       r.configurations);
        } else if (*run) {
            auto cfg = resolve(rf, *run);
            auto s = bench::cmd_run(cfg);
            fmt::print("{} scheduled, {} already recorded, {} executed ({} valid, {} aborted) -> {}\n", s.scheduled,
                       s.skipped, s.executed, s.valid, s.aborted, s.results.string());
        } else if (*rep) {
            auto r = bench::cmd_report(rep_in);
            fmt::print("{}", r.text);
            if (!rep_json.empty())
                std::ofstream(rep_json) << r.json.dump(2) << '\n';
        } else if (*st) {
            std::vector<fs::path> files(st_in.begin(), st_in.end());
            auto r = bench::cmd_stats(files);
            fmt::print("{}", bench::stats_text(r));
            if (!st_json.empty())
                std::ofstream(st_json) << bench::to_json(r).dump(2) << '\n';
        } else if (*rd) {
            LoadCase c = parse_load_case(slurp(rd_case));
            ValidationOptions opts;
            opts.resolution = rd_res;
            SurfaceMesh surface;
            if (!rd_program.empty() || !rd_stl.empty()) {
                Evaluation ev;
                if (!rd_program.empty()) {
                    ev = evaluate_source(slurp(rd_program), c, opts);
                } else {
                    auto text = slurp(rd_stl);
                    ev = evaluate_stl({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}, c, opts);
                }
                if (!ev.report.compiled)
                    std::cerr << "warning: " << ev.report.compile_error << " (rendering the domain only)\n";
                surface = ev.surface;
                std::cout << to_json(ev.report).dump(2) << '\n';
            }
            std::vector<ViewDirection> views;
            for (const auto& v : rd_views)
                views.push_back(view_direction_from_string(v));
            if (views.empty())
                views = default_views();
            fs::create_directories(rd_out);
            for (auto d : views) {
                Image img = render_view(surface, c, {d, rd_size, rd_size});
                fs::path p = fs::path(rd_out) / fmt::format("view_{}.{}", file_tag(d), rd_format);
                spit(p, rd_format == "png" ? encode_png(img) : encode_ppm(img));
                fmt::print("{}\n", p.string());
            }
        }
    } catch (const bench::EmptyResults& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
