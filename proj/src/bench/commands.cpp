#include "physcad/bench/commands.hpp"

#include "physcad/agent/orchestrator.hpp"
#include "physcad/agent/remote_backend.hpp"
#include "physcad/render.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace physcad::bench {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, std::string_view bytes)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw std::runtime_error("write failed for " + p.string());
}

std::string read_file(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Model ids may carry slashes or colons; keep the run directory one level deep.
std::string path_component(const std::string& s)
{
    std::string out = s;
    for (char& ch : out)
        if (ch == '/' || ch == '\\' || ch == ':' || ch == ' ')
            ch = '_';
    return out.empty() ? "_" : out;
}

struct Job {
    const LoadCase* base;
    VariantSpec variant;
    int run_index;
};

} // namespace

GenCasesResult cmd_gen_cases(const fs::path& out_dir, const std::vector<double>& geom_scales,
                             const std::vector<double>& force_scales)
{
    fs::create_directories(out_dir);
    GenCasesResult res;
    auto cases = builtin_cases();
    nlohmann::json manifest;
    manifest["geom_scales"] = geom_scales;
    manifest["force_scales"] = force_scales;
    manifest["cases"] = nlohmann::json::array();
    for (const auto& c : cases) {
        auto p = out_dir / (c.problem_id + ".json");
        write_file(p, serialize_load_case(c) + "\n");
        res.case_files.push_back(p);
        manifest["cases"].push_back({{"problem_id", c.problem_id}, {"file", p.filename().string()}});
    }
    auto configs = enumerate_variants(cases, geom_scales, force_scales);
    manifest["configurations"] = nlohmann::json::array();
    for (const auto& [c, v] : configs)
        manifest["configurations"].push_back(
            {{"problem_id", c.problem_id}, {"variant", v.key()}, {"geom_scale", v.geom_scale},
             {"force_scale", v.force_scale}});
    res.configurations = configs.size();
    res.manifest = out_dir / "manifest.json";
    write_file(res.manifest, manifest.dump(2) + "\n");
    return res;
}

std::vector<LoadCase> load_cases(const std::string& spec)
{
    std::vector<LoadCase> out;
    if (spec == "builtin") {
        out = builtin_cases();
    } else if (fs::is_directory(spec)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(spec))
            if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "manifest.json")
                files.push_back(e.path());
        for (const auto& f : files)
            out.push_back(parse_load_case(read_file(f)));
    } else if (fs::is_regular_file(spec)) {
        out.push_back(parse_load_case(read_file(spec)));
    } else {
        throw std::invalid_argument("no such case source: " + spec);
    }
    std::sort(out.begin(), out.end(), [](const LoadCase& a, const LoadCase& b) { return a.problem_id < b.problem_id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].problem_id == out[i - 1].problem_id)
            throw std::invalid_argument("duplicate problem_id " + out[i].problem_id);
    return out;
}

std::uint64_t run_seed(std::uint64_t base, const std::string& model, const std::string& problem_id,
                       const std::string& variant, int run_index)
{
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(model);
    mix(problem_id);
    mix(variant);
    mix(std::to_string(run_index));
    return h ^ (base * 0x9E3779B97F4A7C15ull);
}

std::string record_key(const std::string& model, const std::string& problem_id, const std::string& variant,
                       int run_index)
{
    return model + '\x1f' + problem_id + '\x1f' + variant + '\x1f' + std::to_string(run_index);
}

BackendFactory make_backend_factory(const BenchConfig& cfg)
{
    if (cfg.backend == "heuristic")
        return {};
    if (cfg.backend == "mock") {
        auto script = agent::ScriptedBackend::script_from_json(nlohmann::json::parse(read_file(cfg.mock_script)));
        return [script] { return std::make_unique<agent::ScriptedBackend>(script); };
    }
    agent::RemoteConfig rc;
    rc.provider = agent::provider_from_string(cfg.provider);
    rc.endpoint = cfg.endpoint;
    rc.api_key_env = cfg.api_key_env;
    return [rc] { return std::make_unique<agent::RemoteBackend>(rc); };
}

std::vector<RunRecord> read_results(const fs::path& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read " + path.string());
    std::vector<RunRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(run_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), n, e.what()));
        }
    }
    return out;
}

RunSummary cmd_run(const BenchConfig& cfg, BackendFactory factory)
{
    cfg.validate();
    if (!factory)
        factory = make_backend_factory(cfg);
    const bool heuristic = cfg.backend == "heuristic" && !factory;
    const std::string model = cfg.model_id();

    auto cases = load_cases(cfg.cases);
    if (!cfg.case_ids.empty()) {
        std::set<std::string> wanted(cfg.case_ids.begin(), cfg.case_ids.end());
        std::erase_if(cases, [&](const LoadCase& c) { return !wanted.count(c.problem_id); });
        if (cases.size() != wanted.size())
            throw std::invalid_argument("case filter names an unknown problem_id");
    }

    fs::create_directories(cfg.out);
    RunSummary summary;
    summary.results = fs::path(cfg.out) / "results.jsonl";

    std::set<std::string> done;
    if (fs::exists(summary.results))
        for (const auto& r : read_results(summary.results))
            if (r.final_status != RunStatus::Aborted)
                done.insert(record_key(r.model_id, r.problem_id, r.variant, r.run_index));

    std::vector<Job> jobs;
    for (const auto& c : cases)
        for (double g : cfg.geom_scales)
            for (double f : cfg.force_scales)
                for (int run = 0; run < cfg.runs; ++run) {
                    VariantSpec v{g, f};
                    ++summary.scheduled;
                    if (done.count(record_key(model, c.problem_id, v.key(), run)))
                        ++summary.skipped;
                    else
                        jobs.push_back({&c, v, run});
                }

    std::ofstream results(summary.results, std::ios::app);
    if (!results)
        throw std::runtime_error("cannot open " + summary.results.string());
    std::mutex writer;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;

    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
                return;
            const Job& job = jobs[i];
            try {
                LoadCase c = apply_variant(*job.base, job.variant);
                std::string vkey = job.variant.key();
                agent::RunIdentity id{vkey, job.run_index, run_seed(cfg.seed, model, c.problem_id, vkey, job.run_index)};
                fs::path run_dir = fs::path(cfg.out) / path_component(model) / c.problem_id / vkey /
                                   std::to_string(job.run_index);

                agent::PipelineConfig pc;
                pc.model_id = model;
                pc.max_iterations = cfg.max_iterations;
                pc.validation.resolution = cfg.resolution;
                pc.validation.material = cfg.material;
                pc.validation.sf_range = cfg.sf_range;
                pc.fea_feedback = cfg.fea_feedback;
                pc.render_size = cfg.render_size;
                pc.record_timing = cfg.backend == "remote";
                if (cfg.save_artifacts) {
                    fs::create_directories(run_dir);
                    pc.on_iteration = [&run_dir](const agent::IterationArtifacts& a) {
                        fs::path dir = run_dir / fmt::format("iter_{}", a.iteration);
                        fs::create_directories(dir);
                        write_file(dir / "program.json", a.program_source);
                        if (a.evaluation)
                            write_file(dir / "validation.json", to_json(a.evaluation->report).dump(2) + "\n");
                        for (const auto& [d, img] : a.views) {
                            auto bytes = encode_ppm(img);
                            write_file(dir / ("view_" + file_tag(d) + ".ppm"),
                                       std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
                        }
                    };
                }

                agent::RunOutcome out;
                if (heuristic) {
                    out = agent::run_heuristic(c, pc, id);
                } else {
                    auto backend = factory();
                    out = cfg.single_agent ? agent::single_agent_pipeline(c, *backend, pc, id)
                                           : agent::run_pipeline(c, *backend, pc, id);
                }
                if (cfg.save_artifacts) {
                    nlohmann::json t = nlohmann::json::array();
                    for (const auto& e : out.state.transcript)
                        t.push_back(agent::to_json(e));
                    write_file(run_dir / "transcript.json", t.dump(2) + "\n");
                }

                std::lock_guard lock(writer);
                results << to_json(out.record).dump() << '\n';
                results.flush();
                ++summary.executed;
                if (out.record.final_status == RunStatus::Valid)
                    ++summary.valid;
                if (out.record.final_status == RunStatus::Aborted)
                    ++summary.aborted;
            } catch (...) {
                std::lock_guard lock(writer);
                if (!failure)
                    failure = std::current_exception();
                next = jobs.size();
                return;
            }
        }
    };

    int nthreads = std::min<int>(cfg.parallel, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return summary;
}

} // namespace physcad::bench
