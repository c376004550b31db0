// puppy: command-line front end.
//
// Exit codes: 0 ok, 2 parse or usage error, 3 track not simple, 4 forbidden
// degeneracy (with --no-chamfer, or chamfering failed), 5 internal error,
// 6 verification failed, 7 not orthogonal, 8 cannot bind port.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "puppy/chamfer.hpp"
#include "puppy/corpus.hpp"
#include "puppy/diagram.hpp"
#include "puppy/dynamics.hpp"
#include "puppy/render.hpp"
#include "puppy/service.hpp"
#include "puppy/strategy.hpp"

namespace fs = std::filesystem;
using namespace puppy;

namespace {

enum Exit { kOk = 0, kParse = 2, kNotSimple = 3, kDegenerate = 4, kInternal = 5, kVerify = 6, kNotOrthogonal = 7, kBind = 8 };

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const EpsilonTooLarge*>(&e)) return kParse;
  if (dynamic_cast<const NotSimple*>(&e) || dynamic_cast<const DegenerateGeometry*>(&e)) return kNotSimple;
  if (dynamic_cast<const DegenerateInput*>(&e) || dynamic_cast<const SelectionFailed*>(&e)) return kDegenerate;
  if (dynamic_cast<const VerificationFailed*>(&e) || dynamic_cast<const PullbackFailed*>(&e) ||
      dynamic_cast<const NoSuchHandedStrategy*>(&e)) {
    return kVerify;
  }
  if (dynamic_cast<const NotOrthogonal*>(&e)) return kNotOrthogonal;
  return kInternal;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<Degeneracy> forbidden(const Track& t) {
  std::vector<Degeneracy> out;
  for (const Degeneracy& d : detect_degeneracies(t)) {
    if (is_forbidden(d.type)) out.push_back(d);
  }
  return out;
}

struct Analysis {
  std::optional<ChamferMap> chamfer;
  AttractionDiagram diagram;
};

// Builds the diagram, chamfering first when forbidden degeneracies exist.
Analysis analyse(const Track& t, bool allow_chamfer, std::ostream& log) {
  const auto bad = forbidden(t);
  if (!bad.empty()) {
    if (!allow_chamfer) {
      std::string msg = "forbidden degeneracies:";
      for (const auto& d : bad) msg += "\n  " + d.describe();
      throw DegenerateInput(msg);
    }
    EpsilonSelection sel = select_epsilon(t);
    log << "chamfered: epsilon=" << to_decimal(sel.map.epsilon) << " attempts=" << sel.attempts << " ("
        << bad.size() << " forbidden degeneracies in the original)\n";
    Analysis a{sel.map, build_diagram(sel.map.chamfered)};
    classify_cycles(a.diagram);
    return a;
  }
  Analysis a{std::nullopt, build_diagram(t)};
  classify_cycles(a.diagram);
  return a;
}

void print_census(const AttractionDiagram& d, std::ostream& out) {
  int diagonal = 0;
  for (const auto& c : d.cycles) diagonal += c.diagonal ? 1 : 0;
  out << "cycles: " << d.cycles.size() << ", essential: " << d.essential_count() << "\n";
  out << "pivots: " << d.pivots.size() << ", arcs: " << d.arcs.size() << ", diagonal cycles: " << diagonal << "\n";
  out << "degeneracies: " << d.degeneracies.size();
  for (const auto& g : d.degeneracies) out << "\n  " << g.describe();
  out << "\n";
}

int cmd_diagram(const std::string& track_file, const std::string& out_dir, bool no_chamfer, int size) {
  const Track t = load_track_file(track_file);
  const Analysis a = analyse(t, !no_chamfer, std::cout);
  const fs::path dir(out_dir);
  const std::string stem = stem_of(track_file);
  RenderOptions ro;
  ro.size = size;
  write_file(dir / (stem + ".diagram.json"), diagram_json(a.diagram));
  write_file(dir / (stem + ".diagram.svg"), render_svg(a.diagram, ro));
  write_file(dir / (stem + ".dual.svg"), render_svg(build_dual_diagram(a.diagram.track, a.diagram), a.diagram.track, ro));
  write_file(dir / (stem + ".track.svg"), render_svg(a.diagram.track, ro));
  if (a.chamfer) write_file(dir / (stem + ".chamfer.json"), chamfer_map_to_json(*a.chamfer).dump(2));
  print_census(a.diagram, std::cout);
  return kOk;
}

int cmd_strategy(const std::string& track_file, const std::string& start_text, const std::string& hand,
                 bool orthogonal, bool no_chamfer, const std::string& out_dir) {
  const Track t = load_track_file(track_file);
  const Configuration start = parse_configuration(t, start_text);
  const Want want = parse_want(hand);
  const fs::path dir(out_dir);
  const std::string stem = stem_of(track_file);

  if (orthogonal) {
    const OrthogonalPlan plan = orthogonal_strategy(t, start);
    const SimTrace tr = simulate(t, plan.script);
    const bool within = tr.total_human_walk <= 2.0 * t.perimeter() + t.tolerance();
    write_file(dir / (stem + ".orthogonal.script.json"), script_json(plan.script));
    write_file(dir / (stem + ".orthogonal.trace.json"), simtrace_json(t, tr));
    std::cout << "orthogonal: u1=" << plan.u1 << " u2=" << plan.u2 << " captured=" << (tr.captured ? "true" : "false")
              << " walk=" << wire_number(tr.total_human_walk) << " bound=" << wire_number(2.0 * t.perimeter())
              << "\n";
    if (!tr.captured || !within) throw VerificationFailed("orthogonal strategy did not capture within 2 perimeters");
    return kOk;
  }

  const Analysis a = analyse(t, !no_chamfer, std::cout);
  const StrategyGraph g = build_strategy_graph(a.diagram);
  if (a.chamfer) {
    const PullbackReport r = chamfered_strategy(*a.chamfer, a.diagram, g, start, want);
    write_file(dir / (stem + ".pullback.json"), pullback_to_json(*a.chamfer, r).dump(2));
    std::cout << "pull-back: captured=" << (r.captured ? "true" : "false") << " walk=" << wire_number(r.original_walk)
              << " legs=" << r.script.legs.size() << "\n";
    return r.captured ? kOk : kVerify;
  }
  const Strategy s = find_strategy(a.diagram, g, start, want);
  write_file(dir / (stem + ".strategy.json"), strategy_to_json(a.diagram, g, s).dump(2));
  const VerifyReport v = verify_strategy(a.diagram, s);
  write_file(dir / (stem + ".verify.json"), verify_report_to_json(v).dump(2));
  std::cout << "strategy: " << to_string(s.handedness) << " steps=" << s.steps.size()
            << " predicted=" << wire_number(s.predicted_walk) << "\n";
  std::cout << "verify: captured=" << (v.captured ? "true" : "false") << " walk=" << wire_number(v.walk)
            << " bound=" << wire_number(v.bound) << " pivots=" << v.pivots << "\n";
  return v.captured && v.within_bound ? kOk : kVerify;
}

int cmd_simulate(const std::string& track_file, const std::string& script_file, const std::string& start_text,
                 const std::string& out) {
  const Track t = load_track_file(track_file);
  Configuration def{{0.0}, {Feature::Edge, 0, 0.5}};
  if (!start_text.empty()) def = parse_configuration(t, start_text);
  HumanScript script = load_script(read_file(script_file), def);
  if (!start_text.empty()) script.start = def;
  const SimTrace tr = simulate(t, script);
  const std::string json = simtrace_json(t, tr);
  if (out.empty()) {
    std::cout << json << "\n";
  } else {
    write_file(out, json);
    std::cout << "captured=" << (tr.captured ? "true" : "false") << " walk=" << wire_number(tr.total_human_walk)
              << " events=" << tr.events.size() << "\n";
  }
  return kOk;
}

int cmd_chamfer(const std::string& track_file, const std::string& epsilon, const std::string& out) {
  const Track t = load_track_file(track_file);
  ChamferMap m;
  if (epsilon.empty()) {
    m = select_epsilon(t).map;
  } else {
    m = chamfer(t, parse_decimal(epsilon));
  }
  const std::string json = chamfer_map_to_json(m).dump(2);
  if (out.empty()) {
    std::cout << json << "\n";
  } else {
    write_file(out, json);
    write_file(fs::path(out).replace_extension(".track.json"), dump_track(m.chamfered));
    std::cout << "epsilon=" << to_decimal(m.epsilon) << " vertices=" << m.chamfered.size() << "\n";
  }
  return kOk;
}

std::vector<Track> lab_corpus(const std::string& source, int generate) {
  std::vector<Track> out;
  if (!source.empty() && fs::is_directory(source)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(source)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Track t = load_track_file(f.string());
      if (t.name().empty()) t = Track::from_exact(t.exact_vertices(), f.stem().string());
      out.push_back(std::move(t));
    }
    return out;
  }
  if (!source.empty()) throw ParseError("corpus directory not found: " + source);
  return generic_corpus(corpus_seed(), generate);
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_lab(const std::string& corpus_dir, int generate, int starts, int laps, const std::string& out) {
  const std::vector<Track> corpus = lab_corpus(corpus_dir, generate);
  std::mt19937_64 rng(corpus_seed() ^ 0x1ab);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::ostringstream csv;
  csv << "track,n,perimeter,regions,start,ccw_captured,ccw_walk,ccw_period,cw_captured,cw_walk,cw_period,"
         "oblivious_captured,oblivious_walk,counterexample\n";
  int rows = 0, gaps = 0, counterexamples = 0, both_fail = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const Track& t = corpus[k];
    const std::string name = t.name().empty() ? "poly" + std::to_string(k) : t.name();
    std::string regions = "ok";
    try {
      Analysis a = analyse(t, true, std::cerr);
      const StrategyGraph g = build_strategy_graph(a.diagram);
      const RegionMap m = compute_regions(a.diagram, g);
      regions = std::string(a.chamfer ? "chamfered-" : "") + (m.d_connected && m.s_connected ? "ok" : "disconnected");
    } catch (const CoverageGap& e) {
      regions = "gap";
      ++gaps;
    } catch (const Error& e) {
      regions = std::string("error:") + e.what();
    }
    for (int j = 0; j < starts; ++j) {
      const Configuration c{{u(rng) * t.perimeter()}, t.puppy_param_at(u(rng) * t.puppy_length())};
      const DirectionalOutcome ccw = evaluate_directional(t, c, WalkDir::CCW, laps);
      const DirectionalOutcome cw = evaluate_directional(t, c, WalkDir::CW, laps);
      const ObliviousOutcome ob = evaluate_oblivious(t, c);
      const bool flag = !ob.captured;
      counterexamples += flag ? 1 : 0;
      both_fail += (!ccw.captured && !cw.captured) ? 1 : 0;
      csv << csv_field(name) << ',' << t.size() << ',' << wire_number(t.perimeter()) << ',' << csv_field(regions)
          << ',' << csv_field(format_configuration(c)) << ',' << (ccw.captured ? "true" : "false") << ','
          << wire_number(ccw.walk) << ',' << ccw.period_laps << ',' << (cw.captured ? "true" : "false") << ','
          << wire_number(cw.walk) << ',' << cw.period_laps << ',' << (ob.captured ? "true" : "false") << ','
          << wire_number(ob.walk) << ',' << (flag ? "COUNTEREXAMPLE" : "") << '\n';
      ++rows;
    }
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out, csv.str());
  }
  std::cerr << "tracks: " << corpus.size() << ", rows: " << rows << ", coverage gaps: " << gaps
            << ", oblivious counterexamples: " << counterexamples << ", both directions fail: " << both_fail << "\n";
  return kOk;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& track_file, const std::string& host, int port, std::size_t capacity,
              bool no_chamfer) {
  ServiceOptions opt;
  opt.capacity = capacity;
  opt.auto_chamfer = !no_chamfer;
  if (!track_file.empty()) opt.default_track = load_track_file(track_file);
  Service service(opt);
  HttpServer server(service);
  const int bound = server.start(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return kBind;
  }
  std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.wait();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Puppy pursuit: attraction diagrams, capture strategies, chamfering, simulation"};
  app.require_subcommand(1);

  std::string track, out_dir = ".", start, hand = "any", script, out, epsilon, corpus, host = "127.0.0.1";
  bool no_chamfer = false, orthogonal = false;
  int size = 720, generate = 100, starts = 5, laps = 5, port = 8080;
  std::size_t capacity = 256;

  auto* diagram = app.add_subcommand("diagram", "Attraction diagram JSON and SVGs, with a cycle census");
  diagram->add_option("track", track, "Track file")->required();
  diagram->add_option("-o,--out-dir", out_dir, "Output directory");
  diagram->add_flag("--no-chamfer", no_chamfer, "Fail on forbidden degeneracies instead of chamfering");
  diagram->add_option("--size", size, "SVG size in pixels");

  auto* strategy = app.add_subcommand("strategy", "Capture strategy from a start configuration, verified");
  strategy->add_option("track", track, "Track file")->required();
  strategy->add_option("--start", start, "Start, x=<s>,y=<edge|vertex>:<i>:<t>")->required();
  strategy->add_option("--hand", hand, "dexter, sinister or any");
  strategy->add_flag("--orthogonal", orthogonal, "Two-phase counterclockwise strategy for orthogonal tracks");
  strategy->add_flag("--no-chamfer", no_chamfer, "Fail on forbidden degeneracies instead of chamfering");
  strategy->add_option("-o,--out-dir", out_dir, "Output directory");

  auto* simulate_cmd = app.add_subcommand("simulate", "Replay a human script and write the event trace");
  simulate_cmd->add_option("track", track, "Track file")->required();
  simulate_cmd->add_option("script", script, "Script file")->required();
  simulate_cmd->add_option("--start", start, "Override the script's start");
  simulate_cmd->add_option("-o,--out", out, "Trace file (stdout when omitted)");

  auto* chamfer_cmd = app.add_subcommand("chamfer", "Chamfer a track and export the correspondence");
  chamfer_cmd->add_option("track", track, "Track file")->required();
  chamfer_cmd->add_option("--epsilon", epsilon, "Fixed epsilon (selected automatically when omitted)");
  chamfer_cmd->add_option("-o,--out", out, "Map file (stdout when omitted)");

  auto* lab = app.add_subcommand("lab", "Directional and oblivious walks over a corpus, as CSV");
  lab->add_option("corpus", corpus, "Directory of track files (generated corpus when omitted)");
  lab->add_option("--generate", generate, "Generated corpus size (seed from PUPPY_SEED)");
  lab->add_option("--starts", starts, "Random starts per track");
  lab->add_option("--laps", laps, "Laps for the one-direction walks");
  lab->add_option("-o,--out", out, "CSV file (stdout when omitted)");

  auto* serve = app.add_subcommand("serve", "Run the session service over HTTP");
  serve->add_option("track", track, "Default track for sessions created without one");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--capacity", capacity, "Sessions kept in memory");
  serve->add_flag("--no-chamfer", no_chamfer, "Answer 409 for degenerate tracks instead of chamfering");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*diagram) return cmd_diagram(track, out_dir, no_chamfer, size);
    if (*strategy) return cmd_strategy(track, start, hand, orthogonal, no_chamfer, out_dir);
    if (*simulate_cmd) return cmd_simulate(track, script, start, out);
    if (*chamfer_cmd) return cmd_chamfer(track, epsilon, out);
    if (*lab) return cmd_lab(corpus, generate, starts, laps, out);
    if (*serve) return cmd_serve(track, host, port, capacity, no_chamfer);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
  return kInternal;
}
