// Command-line front end: convert, filter, check, stats, extract-dict, eval,
// serve.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "shekaste/batch.hpp"
#include "shekaste/bleu.hpp"
#include "shekaste/converter.hpp"
#include "shekaste/corpus.hpp"
#include "shekaste/serialize.hpp"
#include "shekaste/service.hpp"

using namespace shekaste;

namespace {

std::string default_data_dir() {
  if (const char* env = std::getenv("SHEKASTE_DATA")) return env;
  return SHEKASTE_DATA_DIR;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path);
    in = &file;
  }
  std::vector<std::string> out;
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
  }
  return out;
}

// Writes to `path`, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Every informal surface the toolkit knows: lexicon keys plus informal verb
// forms.
Lexicon informal_words(const ConverterResources& res) {
  Lexicon lex = res.lexicon;
  for (const auto& v : res.verbs.entries()) {
    if (!v.informal.empty() && v.informal != v.formal) lex.add({v.informal, v.formal, 1, {}, "verb"});
  }
  return lex;
}

Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Informal to formal Persian conversion and parallel-corpus tools"};
  app.require_subcommand(1);
  std::string data_dir = default_data_dir();
  app.add_option("--data", data_dir, "Directory with rules, lexicons and word lists")->envname("SHEKASTE_DATA");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert informal lines to formal text");
  std::string convert_in = "-";
  std::string convert_out = "-";
  bool emit_links = false;
  bool emit_trace = false;
  bool no_syntactic = false;
  bool serial = false;
  convert->add_option("--input,-i", convert_in, "Input file, one sentence per line ('-' for stdin)");
  convert->add_option("--output,-o", convert_out, "Output file ('-' for stdout)");
  convert->add_flag("--emit-links", emit_links, "Write one JSON object per line with alignment links");
  convert->add_flag("--emit-trace", emit_trace, "Write one JSON object per line with the rewrite trace");
  convert->add_flag("--no-syntactic", no_syntactic, "Skip the syntactic transforms");
  convert->add_flag("--serial", serial, "Disable OpenMP");

  // filter
  auto* filter = app.add_subcommand("filter", "Keep candidate sentences (26-40 tokens, at least 4 informal words)");
  std::string filter_in;
  std::string filter_out = "-";
  filter->add_option("--input,-i", filter_in, "Sentences, one per line")->required();
  filter->add_option("--output,-o", filter_out, "Accepted sentences");

  // check
  auto* check = app.add_subcommand("check", "Validate a JSONL corpus");
  std::string check_in;
  std::string check_out = "-";
  bool check_json = false;
  check->add_option("--input,-i", check_in, "Corpus file")->required();
  check->add_option("--output,-o", check_out, "Report file");
  check->add_flag("--json", check_json, "Write the report as JSON");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_in;
  std::string stats_out = "-";
  bool stats_serial = false;
  stats->add_option("--input,-i", stats_in, "Corpus file")->required();
  stats->add_option("--output,-o", stats_out, "JSON output");
  stats->add_flag("--serial", stats_serial, "Disable OpenMP");

  // extract-dict
  auto* extract = app.add_subcommand("extract-dict", "Extract the informal->formal dictionary from a corpus");
  std::string extract_in;
  std::string extract_out;
  extract->add_option("--input,-i", extract_in, "Corpus file")->required();
  extract->add_option("--output,-o", extract_out, "Dictionary TSV")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Corpus BLEU of hypotheses against references");
  std::string hyp_path;
  std::string ref_path;
  std::size_t min_len = 15;
  std::size_t max_len = 25;
  bool no_filter = false;
  std::string eval_json;
  std::string eval_text = "-";
  eval->add_option("--hyp", hyp_path, "Hypotheses, one per line")->required();
  eval->add_option("--ref", ref_path, "References, one per line")->required();
  eval->add_option("--min-len", min_len, "Minimum reference length in tokens")->capture_default_str();
  eval->add_option("--max-len", max_len, "Maximum reference length in tokens")->capture_default_str();
  eval->add_flag("--no-length-filter", no_filter, "Score every pair");
  eval->add_option("--json", eval_json, "Machine-readable report path (default: <hyp>.bleu.json, '-' for stdout)");
  eval->add_option("--text", eval_text, "Plain-text report path");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  ServiceConfig service_config;
  std::vector<std::string> session_specs;
  std::string corpus_path;
  std::string history_path;
  serve->add_option("--host", service_config.host, "Listen address")->envname("SHEKASTE_HOST")->capture_default_str();
  serve->add_option("--port", service_config.port, "Listen port (0 picks one)")
      ->envname("SHEKASTE_PORT")
      ->capture_default_str();
  serve->add_option("--corpus", corpus_path, "JSONL corpus to load and keep updated")->envname("SHEKASTE_CORPUS");
  serve->add_option("--history", history_path, "Where to write the suggestion history snapshot")
      ->envname("SHEKASTE_HISTORY");
  serve->add_option("--session", session_specs, "token:annotator:role (repeatable)")
      ->envname("SHEKASTE_SESSIONS")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) {
      const Converter converter(ConverterResources::load(data_dir));
      ConverterConfig cfg;
      cfg.syntactic_transforms = !no_syntactic;
      const auto lines = read_lines(convert_in);
      const auto results =
          convert_batch(converter, lines, cfg, serial ? Execution::serial : Execution::parallel);
      Output out(convert_out);
      int failures = 0;
      for (const auto& r : results) {
        const bool failed = !r.trace.empty() && r.trace.front().stage == "error";
        if (failed) {
          ++failures;
          std::cerr << "error: " << r.trace.front().after << '\n';
        }
        if (!emit_links && !emit_trace) {
          out.stream() << r.formal_text << '\n';
          continue;
        }
        nlohmann::ordered_json row;
        row["informal_tokens"] = r.informal_tokens;
        row["formal_text"] = r.formal_text;
        row["formal_tokens"] = r.formal_tokens;
        row["syntactic_change"] = r.syntactic_change;
        if (emit_links) row["links"] = links_to_json(r.links);
        if (emit_trace) row["trace"] = trace_to_json(r.trace);
        out.stream() << row.dump() << '\n';
      }
      return failures == 0 ? 0 : 1;
    }

    if (*filter) {
      const auto res = ConverterResources::load(data_dir);
      const auto lexicon = informal_words(res);
      const auto lines = read_lines(filter_in);
      const auto kept = filter_candidates(lines, lexicon);
      Output out(filter_out);
      for (const auto& s : kept) out.stream() << s << '\n';
      std::cerr << kept.size() << " of " << lines.size() << " sentences kept\n";
      return 0;
    }

    if (*check) {
      std::ifstream in(check_in, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + check_in);
      CorpusReader reader(in, check_in);
      Output out(check_out);
      std::size_t records = 0;
      std::size_t errors = 0;
      std::size_t warnings = 0;
      auto rows = nlohmann::ordered_json::array();
      while (auto r = reader.next()) {
        ++records;
        for (const auto& issue : validate_record(*r)) {
          (issue.is_error() ? errors : warnings)++;
          if (check_json) {
            auto row = issue_to_json(issue);
            row["record"] = r->id;
            row["line"] = reader.line();
            rows.push_back(std::move(row));
          } else {
            out.stream() << check_in << ':' << reader.line() << ": " << r->id << ": "
                         << (issue.is_error() ? "error" : "warning") << " [" << issue.code << "] " << issue.message
                         << '\n';
          }
        }
      }
      if (check_json) {
        nlohmann::ordered_json report;
        report["records"] = records;
        report["errors"] = errors;
        report["warnings"] = warnings;
        report["issues"] = std::move(rows);
        out.stream() << report.dump(2) << '\n';
      } else {
        out.stream() << records << " records, " << errors << " errors, " << warnings << " warnings\n";
      }
      return errors == 0 ? 0 : 1;
    }

    if (*stats) {
      const auto records = load_corpus(stats_in);
      const auto s = corpus_stats(records, stats_serial ? Execution::serial : Execution::parallel);
      auto report = stats_to_json(s);
      report["sources"] = source_distribution_json(s)["sources"];
      Output out(stats_out);
      out.stream() << report.dump(2) << '\n';
      return 0;
    }

    if (*extract) {
      std::vector<CorpusRecord> records = load_corpus(extract_in);
      const auto result = extract_dictionary(records);
      save_lexicon(result.dictionary, extract_out);
      std::cerr << result.dictionary.size() << " dictionary entries, " << result.unique_word_pairs
                << " unique word pairs, " << result.skipped_long_phrases << " long phrases skipped\n";
      return 0;
    }

    if (*eval) {
      BleuConfig cfg;
      if (!no_filter) cfg.length_filter = LengthRange{min_len, max_len};
      const auto report = evaluate_lines(read_lines(hyp_path), read_lines(ref_path), cfg);
      {
        Output text(eval_text);
        text.stream() << report_to_text(report);
      }
      const std::string json_path = eval_json.empty() ? hyp_path + ".bleu.json" : eval_json;
      Output json(json_path);
      json.stream() << report_to_json(report).dump(2) << '\n';
      return 0;
    }

    if (*serve) {
      for (const auto& spec : session_specs) service_config.sessions.push_back(parse_session_spec(spec));
      if (service_config.sessions.empty()) {
        std::cerr << "error: no sessions configured (use --session token:annotator:role)\n";
        return 2;
      }
      service_config.corpus_path = corpus_path;
      service_config.history_path = history_path;
      auto converter = std::make_shared<const Converter>(ConverterResources::load(data_dir));
      Service service(converter, service_config);
      const int port = service.bind();
      std::cerr << "listening on " << service_config.host << ':' << port << '\n';
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.run();
      g_service = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
