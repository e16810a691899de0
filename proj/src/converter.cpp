#include "shekaste/converter.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace shekaste {

namespace {

constexpr std::string_view kBe = "به";
constexpr std::string_view kVa = "و";
constexpr std::string_view kAst = "است";
constexpr std::string_view kAgar = "اگر";
constexpr std::string_view kComma = "،";

const std::set<std::string, std::less<>> kPrepositions = {"به", "از", "در", "با", "تا", "برای"};
const std::set<std::string, std::less<>> kPersonTags = {"1s", "2s", "3s", "1p", "2p", "3p"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

bool all_digits(std::string_view core) {
  const auto cps = decode_utf8(core);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) {
    return classify(c) == CharClass::digit;
  });
}

struct Affixes {
  std::string lead;
  std::string core;
  std::string trail;
};

Affixes split_punctuation(std::string_view surface) {
  const std::u32string cps = decode_utf8(surface);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_punctuation(cps[b])) ++b;
  while (e > b && is_punctuation(cps[e - 1])) --e;
  if (b == e) return {std::string(surface), {}, {}};
  const std::u32string_view v(cps);
  return {encode_utf8(v.substr(0, b)), encode_utf8(v.substr(b, e - b)), encode_utf8(v.substr(e))};
}

bool known_with_tags(const Vocabulary& vocab, std::string_view word, const std::vector<std::string>& tags) {
  if (tags.empty()) return vocab.contains(word);
  return std::any_of(tags.begin(), tags.end(), [&](const std::string& t) { return vocab.has_tag(word, t); });
}

bool check_passes(const AmbiguityCandidate& c, std::string_view stem, const Vocabulary& vocab) {
  if (c.check.empty() || c.check == "-") return true;
  std::string spec = c.check;
  std::vector<std::string> tags;
  const std::size_t at = spec.rfind('@');
  if (at != std::string::npos) {
    tags = split_fields(std::string_view(spec).substr(at + 1), '/');
    spec.resize(at);
  }
  return known_with_tags(vocab, replace_all(spec, "{stem}", stem), tags);
}

bool is_verb_word(std::string_view w, const Vocabulary& vocab, const VerbLexicon& verbs) {
  return verbs.find_formal(w) != nullptr || verbs.find_informal(w) != nullptr || vocab.has_tag(w, "V");
}

bool cue_atom_fires(std::string_view atom, const DisambiguationContext& ctx) {
  const auto& s = ctx.sentence;
  const std::size_t p = ctx.position;
  if (atom == "last") return p + 1 == s.size();
  if (atom == "!last") return p + 1 < s.size();
  if (atom == "verb-after" || atom == "no-verb-after") {
    bool found = false;
    for (std::size_t k = p + 1; k < s.size(); ++k) {
      if (is_verb_word(s[k], ctx.vocabulary, ctx.verbs)) found = true;
    }
    return atom == "verb-after" ? found : !found;
  }
  if (atom == "noun-after") {
    return p + 1 < s.size() && (ctx.vocabulary.has_tag(s[p + 1], "N") || ctx.vocabulary.has_tag(s[p + 1], "PN"));
  }
  if (atom.starts_with("before:")) {
    const std::string_view word = atom.substr(7);
    return std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(p), word) !=
           s.begin() + static_cast<std::ptrdiff_t>(p);
  }
  throw std::invalid_argument("unknown disambiguation cue '" + std::string(atom) + "'");
}

bool cue_fires(std::string_view cue, const DisambiguationContext& ctx) {
  if (cue.empty() || cue == "-") return false;
  for (const auto& atom : split_fields(cue, '&')) {
    if (!cue_atom_fires(trim(atom), ctx)) return false;
  }
  return true;
}

// Smallest span covering both; an empty span only contributes when both are.
Span hull(const Span& a, const Span& b) {
  if (a.empty()) return b.empty() ? Span{std::min(a.begin, b.begin), std::min(a.begin, b.begin)} : b;
  if (b.empty()) return a;
  return {std::min(a.begin, b.begin), std::max(a.end, b.end)};
}

}  // namespace

std::string with_ezafe(std::string_view noun) {
  if (ends_with(noun, "ا") || ends_with(noun, "و")) return std::string(noun) + "ی";
  if (ends_with(noun, "ه")) return std::string(noun) + std::string(kZwnjUtf8) + "ی";
  return std::string(noun);
}

Disambiguation disambiguate(const AmbiguityTable& table, std::string_view token, std::string_view suffix,
                            const DisambiguationContext& context, const Lexicon& history) {
  const AmbiguityEntry* entry = table.find(suffix);
  if (entry == nullptr) {
    throw std::invalid_argument("suffix '" + std::string(suffix) + "' is not in the ambiguity table");
  }
  if (!ends_with(token, suffix) || token.size() == suffix.size()) {
    throw std::invalid_argument("token '" + std::string(token) + "' does not end in a stem + '" +
                                std::string(suffix) + "'");
  }
  const std::string_view stem = token.substr(0, token.size() - suffix.size());

  struct Option {
    const AmbiguityCandidate* candidate;
    std::string expansion;
    std::uint64_t frequency;
  };
  std::vector<Option> options;
  for (const auto& c : entry->candidates) {
    if (check_passes(c, stem, context.vocabulary)) {
      options.push_back({&c, replace_all(c.expansion, "{stem}", stem), 0});
    }
  }
  if (options.empty()) {
    for (const auto& c : entry->candidates) options.push_back({&c, replace_all(c.expansion, "{stem}", stem), 0});
  }

  std::uint64_t best = 0;
  for (auto& o : options) {
    if (const LexEntry* h = history.find(token, o.expansion)) o.frequency = h->frequency;
    best = std::max(best, o.frequency);
  }
  std::vector<const Option*> pool;
  for (const auto& o : options) {
    if (o.frequency == best) pool.push_back(&o);
  }

  const Option* chosen = nullptr;
  if (best > 0 && pool.size() == 1) {
    chosen = pool.front();
  } else {
    for (const Option* o : pool) {
      if (cue_fires(o->candidate->cue, context)) {
        chosen = o;
        break;
      }
    }
    if (chosen == nullptr) chosen = pool.front();
  }

  Disambiguation out{chosen->expansion, chosen->candidate->role, {}};
  for (const auto& o : options) {
    if (o.expansion != out.expansion &&
        std::find(out.alternatives.begin(), out.alternatives.end(), o.expansion) == out.alternatives.end()) {
      out.alternatives.push_back(o.expansion);
    }
  }
  return out;
}

ConverterResources ConverterResources::load(const std::filesystem::path& data_dir) {
  ConverterResources r;
  auto vocab = std::make_shared<Vocabulary>(Vocabulary::load(data_dir / "vocabulary.tsv"));
  r.formal_vocabulary = vocab;
  r.lexicon = load_lexicon(data_dir / "lexicon.tsv").lexicon;
  r.verbs = VerbLexicon::load(data_dir / "verbs.tsv");
  r.ambiguity = AmbiguityTable::load(data_dir / "ambiguity.tsv");
  r.rules = load_ruleset(data_dir / "rules.txt");
  for (const auto& idiom : load_word_list(data_dir / "idioms.txt")) r.idioms.push_back(split_tokens(idiom));
  for (const auto& d : load_word_list(data_dir / "destinations.txt")) r.destinations.insert(d);
  return r;
}

struct Converter::Work {
  std::string core;
  std::string lead;
  std::string trail;
  Span origin;  // empty: inserted, anchored at origin.begin
  bool resolved = false;
  // Comma added by the conditional transform; the clause is still open.
  bool pending_comma = false;

  std::string surface() const { return lead + core + trail; }
  bool inserted() const { return origin.empty(); }
};

struct Converter::State {
  std::vector<Work> tokens;
  std::vector<Span> deleted;
  ConversionResult& result;

  std::vector<std::string> cores() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.core);
    return out;
  }

  // Later rounds re-derive earlier decisions; those are logged once.
  void step(std::string stage, std::string source, const Work& at, std::string before, std::string after) {
    ConversionStep s{std::move(stage), std::move(source), at.origin.begin, std::move(before), std::move(after)};
    const auto same = [&](const ConversionStep& o) {
      return o.stage == s.stage && o.source == s.source && o.informal_index == s.informal_index &&
             o.before == s.before && o.after == s.after;
    };
    if (std::none_of(result.trace.begin(), result.trace.end(), same)) result.trace.push_back(std::move(s));
  }

  void alternative(std::size_t index, std::vector<std::string> expansions) {
    for (const auto& a : result.alternatives) {
      if (a.informal_index == index && a.expansions == expansions) return;
    }
    result.alternatives.push_back({index, std::move(expansions)});
  }

  std::vector<std::string> surfaces() const {
    std::vector<std::string> out;
    for (const auto& w : tokens) out.push_back(w.surface());
    return out;
  }
};

Converter::Converter(ConverterResources resources) : resources_(std::move(resources)) {
  if (!resources_.formal_vocabulary) resources_.formal_vocabulary = std::make_shared<Vocabulary>();
  auto known = std::make_shared<Vocabulary>(*resources_.formal_vocabulary);
  for (const auto& v : resources_.verbs.entries()) {
    std::vector<std::string> tags{"V"};
    if (v.intransitive) tags.emplace_back("VI");
    if (!v.person.empty()) tags.push_back(v.person);
    known->add(v.formal, tags);
    if (!v.informal.empty()) known->add(v.informal, {std::string(Vocabulary::kLexiconTag)});
  }
  for (const LexEntry* e : resources_.lexicon.entries()) {
    if (split_tokens(e->informal).size() == 1) known->add(e->informal, {std::string(Vocabulary::kLexiconTag)});
  }
  known_ = known;
  rules_ = resources_.rules.with_vocabulary(known_);
}

const VerbLexEntry* Converter::verb(std::string_view core) const {
  return resources_.verbs.find_formal(core);
}

bool Converter::is_verb(std::string_view core) const {
  return verb(core) != nullptr || known_->has_tag(core, "V");
}

bool Converter::has_tag(std::string_view core, std::string_view tag) const {
  return known_->has_tag(core, tag);
}

std::string Converter::pronoun_person(std::string_view core) const {
  if (!has_tag(core, "PRON")) return {};
  if (const auto* tags = known_->tags(core)) {
    for (const auto& t : *tags) {
      if (kPersonTags.count(t) != 0) return t;
    }
  }
  return {};
}

std::vector<Converter::Work> Converter::expand(const Work& base, const std::vector<std::string>& parts,
                                               State& state, std::string_view stage) const {
  std::vector<Work> out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Work w;
    w.core = parts[k];
    w.origin = base.origin;
    w.resolved = base.resolved;
    if (k == 0) w.lead = base.lead;
    if (k + 1 == parts.size()) w.trail = base.trail;
    // Clitic splitting can expose an informal stem with a known equivalent.
    if (stage != "lexicon" && stage != "phrase-lexicon") {
      const auto hits = resources_.lexicon.lookup(w.core);
      std::string formal;
      if (!hits.empty()) {
        formal = hits.front().formal;
      } else if (const auto* v = resources_.verbs.find_informal(w.core)) {
        formal = v->formal;
      }
      if (!formal.empty()) {
        state.step("lexicon", "lexicon", w, w.core, formal);
        const auto sub = split_tokens(formal);
        for (std::size_t j = 0; j < sub.size(); ++j) {
          Work s = w;
          s.core = sub[j];
          s.resolved = true;
          if (j > 0) s.lead.clear();
          if (j + 1 < sub.size()) s.trail.clear();
          out.push_back(std::move(s));
        }
        continue;
      }
    }
    out.push_back(std::move(w));
  }
  if (out.empty()) {
    state.deleted.push_back(base.origin);
  }
  return out;
}

void Converter::apply_lexicon(State& state) const {
  const Lexicon& lex = resources_.lexicon;
  std::vector<Work> out;
  auto& toks = state.tokens;
  std::size_t i = 0;
  while (i < toks.size()) {
    bool matched = false;
    const std::size_t max_n = std::min({kMaxInformalPhraseTokens, lex.max_informal_tokens(), toks.size() - i});
    for (std::size_t n = max_n; n >= 2; --n) {
      bool usable = true;
      std::string key;
      for (std::size_t k = i; k < i + n; ++k) {
        const Work& w = toks[k];
        if (w.core.empty() || (k > i && !w.lead.empty()) || (k + 1 < i + n && !w.trail.empty())) {
          usable = false;
          break;
        }
        if (k > i) key.push_back(' ');
        key += w.core;
      }
      if (!usable) continue;
      const auto hits = lex.lookup(key);
      if (hits.empty()) continue;
      Work base;
      base.lead = toks[i].lead;
      base.trail = toks[i + n - 1].trail;
      base.origin = toks[i].origin;
      for (std::size_t k = i + 1; k < i + n; ++k) base.origin = hull(base.origin, toks[k].origin);
      base.resolved = true;
      state.step("phrase-lexicon", "lexicon", base, key, hits.front().formal);
      for (auto& w : expand(base, split_tokens(hits.front().formal), state, "phrase-lexicon")) {
        out.push_back(std::move(w));
      }
      i += n;
      matched = true;
      break;
    }
    if (matched) continue;

    Work& w = toks[i];
    std::string formal;
    if (!w.core.empty()) {
      const auto hits = lex.lookup(w.core);
      if (!hits.empty()) {
        formal = hits.front().formal;
      } else if (const auto* v = resources_.verbs.find_informal(w.core)) {
        formal = v->formal;
      }
    }
    if (formal.empty()) {
      out.push_back(std::move(w));
    } else {
      w.resolved = true;
      state.step("lexicon", "lexicon", w, w.core, formal);
      for (auto& x : expand(w, split_tokens(formal), state, "lexicon")) out.push_back(std::move(x));
    }
    ++i;
  }
  state.tokens = std::move(out);
}

void Converter::apply_rule_stages(State& state) const {
  for (RuleCategory stage : RuleSet::kStageOrder) {
    const auto cores = state.cores();
    const StageResult r = rules_.apply_stage(stage, cores);
    if (r.trace.empty()) continue;
    std::map<std::size_t, const TraceEntry*> by_index;
    for (const auto& t : r.trace) by_index[t.token_index] = &t;
    std::vector<Work> out;
    for (std::size_t i = 0; i < state.tokens.size(); ++i) {
      const Work& w = state.tokens[i];
      const auto it = by_index.find(i);
      if (it == by_index.end()) {
        out.push_back(w);
        continue;
      }
      state.step(std::string(to_string(stage)), it->second->rule_id, w, w.core, it->second->after);
      auto parts = expand(w, split_tokens(it->second->after), state, to_string(stage));
      if (parts.empty()) {
        // Keep punctuation of a deleted token on a neighbour.
        if (!w.trail.empty() && !out.empty()) out.back().trail += w.trail;
        if (!w.lead.empty() && i + 1 < state.tokens.size()) state.tokens[i + 1].lead.insert(0, w.lead);
      }
      for (auto& p : parts) out.push_back(std::move(p));
    }
    state.tokens = std::move(out);
  }
}

void Converter::apply_phrase_morphology(State& state) const {
  auto& t = state.tokens;
  // The plural move rebuilds two groups into one phrase-level link.
  auto merge = [&](Span x, Span y) {
    const Span joined = hull(x, y);
    for (auto& w : t) {
      if (w.origin == x || w.origin == y) w.origin = joined;
    }
  };
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    Work& a = t[i];
    Work& b = t[i + 1];
    if (a.core.empty() || b.core.empty() || a.inserted() || b.inserted()) continue;
    if (!a.trail.empty() || !b.lead.empty()) continue;
    if (known_->is_formal(b.core) || is_verb(b.core)) continue;

    // Plural suffix on the adjective moves to the head noun.
    if (has_tag(a.core, "N") && ends_with(b.core, "ا")) {
      const std::string stem = b.core.substr(0, b.core.size() - std::string_view("ا").size());
      if (!stem.empty() && has_tag(stem, "ADJ")) {
        const std::string before = a.core + " " + b.core;
        a.core += std::string(kZwnjUtf8) + "های";
        b.core = stem;
        merge(a.origin, b.origin);
        state.step("phrase-morphology", "plural-on-adjective", a, before, a.core + " " + b.core);
        ++i;
        continue;
      }
    }

    // Left dislocation: "N host+sh" becomes "host-EZ N".
    if ((has_tag(a.core, "N") || has_tag(a.core, "PN")) && ends_with(b.core, "ش")) {
      const std::string host = b.core.substr(0, b.core.size() - std::string_view("ش").size());
      if (!host.empty() && has_tag(host, "N")) {
        const std::string before = a.core + " " + b.core;
        Work head = b;
        head.core = with_ezafe(host);
        head.lead = a.lead;
        head.trail.clear();
        Work dependent = a;
        dependent.lead.clear();
        dependent.trail = b.trail;
        t[i] = std::move(head);
        t[i + 1] = std::move(dependent);
        state.step("phrase-morphology", "left-dislocation", t[i], before, t[i].core + " " + t[i + 1].core);
        ++i;
      }
    }
  }
}

void Converter::apply_disambiguation(State& state, const ConverterConfig& config) const {
  const Lexicon& history = config.history ? *config.history : empty_history_;
  const auto suffixes = resources_.ambiguity.suffixes();
  std::vector<Work> out;
  const auto cores = state.cores();
  for (std::size_t i = 0; i < state.tokens.size(); ++i) {
    const Work& w = state.tokens[i];
    const bool eligible = !w.core.empty() && !w.resolved && !w.inserted() && !known_->is_formal(w.core) &&
                          !is_verb(w.core) && !all_digits(w.core);
    bool done = false;
    if (eligible) {
      for (const auto& suffix : suffixes) {
        if (!ends_with(w.core, suffix) || w.core.size() == suffix.size()) continue;
        const std::string stem = w.core.substr(0, w.core.size() - suffix.size());
        const AmbiguityEntry* entry = resources_.ambiguity.find(suffix);
        const bool any_valid = std::any_of(entry->candidates.begin(), entry->candidates.end(),
                                           [&](const AmbiguityCandidate& c) {
                                             return c.check != "-" && check_passes(c, stem, *known_);
                                           });
        if (!any_valid) continue;
        const DisambiguationContext ctx{cores, i, *known_, resources_.verbs};
        const Disambiguation d = disambiguate(resources_.ambiguity, w.core, suffix, ctx, history);
        state.step("disambiguation", d.role, w, w.core, d.expansion);
        if (!d.alternatives.empty()) state.alternative(w.origin.begin, d.alternatives);
        Work base = w;
        base.resolved = true;
        for (auto& x : expand(base, split_tokens(d.expansion), state, "disambiguation")) out.push_back(std::move(x));
        done = true;
        break;
      }
    }
    if (!done) out.push_back(w);
  }
  state.tokens = std::move(out);
}

void Converter::apply_syntactic(State& state) const {
  auto& t = state.tokens;
  auto make_inserted = [](std::string_view core, std::size_t anchor) {
    Work w;
    w.core = std::string(core);
    w.origin = {anchor, anchor};
    w.resolved = true;
    return w;
  };
  auto last_word = [&]() -> std::optional<std::size_t> {
    for (std::size_t k = t.size(); k-- > 0;) {
      if (!t[k].core.empty()) return k;
    }
    return std::nullopt;
  };

  // (1) restore the auxiliary after a sentence-final perfect participle
  if (const auto k = last_word()) {
    const VerbLexEntry* v = verb(t[*k].core);
    if (v && v->perfect_participle && k == t.size() - 1) {
      Work aux = make_inserted(kAst, t[*k].origin.end);
      aux.trail = t[*k].trail;
      t[*k].trail.clear();
      state.step("syntactic", "light-verb-restoration", aux, t[*k].core, t[*k].core + " " + aux.core);
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(*k) + 1, std::move(aux));
    }
  }

  // (2) destination preposition next to a motion verb
  {
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (resources_.destinations.count(t[i].core) == 0) continue;
      // An object ("من را") is not a destination.
      if (i + 1 < t.size() && t[i + 1].core == "را") continue;
      if (i > 0 && (kPrepositions.count(t[i - 1].core) != 0 || !t[i - 1].trail.empty())) continue;
      const bool pronoun = has_tag(t[i].core, "PRON");
      const VerbLexEntry* before = i > 0 ? verb(t[i - 1].core) : nullptr;
      const VerbLexEntry* after = i + 1 < t.size() && t[i].trail.empty() ? verb(t[i + 1].core) : nullptr;
      bool insert = false;
      if (before && before->takes_destination) {
        insert = !pronoun || pronoun_person(t[i].core) != before->person;
      }
      if (!insert && after && after->takes_destination && !pronoun) insert = true;
      if (insert) targets.push_back(i);
    }
    for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
      Work prep = make_inserted(kBe, t[*it].origin.begin);
      prep.lead = t[*it].lead;
      t[*it].lead.clear();
      state.step("syntactic", "destination-preposition", prep, t[*it].core, prep.core + " " + t[*it].core);
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(*it), std::move(prep));
    }
  }

  // (3) conjunction between juxtaposed nouns before an imperative
  for (std::size_t i = 0; i + 2 < t.size(); ++i) {
    const Work& a = t[i];
    const Work& b = t[i + 1];
    const VerbLexEntry* v = verb(t[i + 2].core);
    if (!v || !v->imperative) continue;
    if (!a.trail.empty() || !b.trail.empty() || a.inserted() || b.inserted()) continue;
    const auto noun = [&](const Work& w) { return has_tag(w.core, "N") && !has_tag(w.core, "PRON"); };
    if (noun(a) && noun(b)) {
      Work conj = make_inserted(kVa, b.origin.begin);
      state.step("syntactic", "conjunction-insertion", conj, a.core + " " + b.core,
                 a.core + " " + conj.core + " " + b.core);
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(conj));
      i += 2;
    }
  }

  // (4) conditional marker before a subjunctive first clause
  if (!t.empty()) {
    const VerbLexEntry* first = verb(t.front().core);
    if (first && first->subjunctive) {
      bool later_present = false;
      for (std::size_t i = 1; i < t.size(); ++i) {
        const VerbLexEntry* v = verb(t[i].core);
        if (v && v->present_indicative) later_present = true;
      }
      if (later_present) {
        if (t.front().trail.empty()) {
          // The clause ends at the subjunctive verb once its complements move.
          t.front().trail = std::string(kComma);
          t.front().pending_comma = true;
        }
        Work agar = make_inserted(kAgar, 0);
        agar.lead = t.front().lead;
        t.front().lead.clear();
        state.step("syntactic", "conditional-marker", agar, t.front().core, agar.core + " " + t.front().core);
        t.insert(t.begin(), std::move(agar));
      }
    }
  }

  // (5) verb-final order: complements after a verb move in front of it
  bool idiom = false;
  {
    const auto cores = state.cores();
    for (const auto& phrase : resources_.idioms) {
      if (phrase.empty() || phrase.size() > cores.size()) continue;
      for (std::size_t i = 0; i + phrase.size() <= cores.size(); ++i) {
        if (std::equal(phrase.begin(), phrase.end(), cores.begin() + static_cast<std::ptrdiff_t>(i))) idiom = true;
      }
    }
  }
  if (!idiom) {
    std::size_t clause_start = 0;
    for (std::size_t p = 0; p < t.size(); ++p) {
      const VerbLexEntry* v = verb(t[p].core);
      if (!v) {
        if (!t[p].trail.empty()) clause_start = p + 1;
        continue;
      }
      if (!t[p].trail.empty() && !t[p].pending_comma) {
        clause_start = p + 1;
        continue;
      }
      std::vector<Work> subjects;
      std::vector<Work> complements;
      std::size_t j = p + 1;
      while (j < t.size()) {
        if (!t[j - 1].trail.empty() && j - 1 != p) break;
        if (t[j].core == kBe && j + 1 < t.size() && t[j].trail.empty() && !t[j + 1].core.empty() &&
            !verb(t[j + 1].core)) {
          complements.push_back(t[j]);
          complements.push_back(t[j + 1]);
          j += 2;
          continue;
        }
        // A subject pronoun closes the clause; "آن" before a noun is a determiner.
        const bool clause_final = j + 1 == t.size() || !t[j].trail.empty();
        if (clause_final && !v->person.empty() && pronoun_person(t[j].core) == v->person) {
          subjects.push_back(t[j]);
          ++j;
          continue;
        }
        break;
      }
      if (subjects.empty() && complements.empty()) {
        if (!t[p].trail.empty()) clause_start = p + 1;
        continue;
      }
      Work moved_verb = t[p];
      const Work& last_moved = t[j - 1];
      const std::string clause_trail = last_moved.trail;
      auto strip_trail = [&](std::vector<Work>& ws) {
        for (auto& w : ws) {
          if (w.origin == last_moved.origin && w.core == last_moved.core) w.trail.clear();
        }
      };
      strip_trail(subjects);
      strip_trail(complements);
      moved_verb.trail += clause_trail;

      std::size_t start = clause_start;
      if (start < p && t[start].core == kAgar) ++start;
      std::vector<Work> rebuilt;
      for (std::size_t k = 0; k < start; ++k) rebuilt.push_back(t[k]);
      for (auto& s : subjects) rebuilt.push_back(s);
      for (std::size_t k = start; k < p; ++k) rebuilt.push_back(t[k]);
      for (auto& c : complements) rebuilt.push_back(c);
      const std::size_t verb_pos = rebuilt.size();
      rebuilt.push_back(moved_verb);
      for (std::size_t k = j; k < t.size(); ++k) rebuilt.push_back(t[k]);

      state.step("syntactic", "verb-final-order", moved_verb, moved_verb.core,
                 std::to_string(p) + "->" + std::to_string(verb_pos));
      t = std::move(rebuilt);
      p = verb_pos;
      clause_start = p + 1;
    }
  }

  // (6) causative form replaced by the plain transitive
  for (auto& w : t) {
    const VerbLexEntry* v = verb(w.core);
    if (v && v->causative_of) {
      state.step("syntactic", "causative-to-transitive", w, w.core, *v->causative_of);
      w.core = *v->causative_of;
    }
  }
}

void Converter::join_imperfective(State& state) const {
  auto& t = state.tokens;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    Work& a = t[i];
    Work& b = t[i + 1];
    if ((a.core != "می" && a.core != "نمی") || b.core.empty() || !a.trail.empty() || !b.lead.empty()) continue;
    if (a.inserted() || b.inserted()) continue;
    const std::string before = a.core + " " + b.core;
    a.core += std::string(kZwnjUtf8) + b.core;
    a.trail = b.trail;
    const Span joined = hull(a.origin, b.origin);
    for (auto& w : t) {
      if (w.origin == a.origin || w.origin == b.origin) w.origin = joined;
    }
    a.origin = joined;
    state.step("orthography", "imperfective-joiner", a, before, a.core);
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
}

void Converter::finish(State& state) const {
  ConversionResult& r = state.result;
  std::vector<const Work*> formal;
  for (const auto& w : state.tokens) {
    if (!w.surface().empty()) formal.push_back(&w);
  }
  r.formal_tokens.clear();
  for (const Work* w : formal) r.formal_tokens.push_back(w->surface());
  r.formal_text = detokenize(r.formal_tokens);
  const std::size_t n_inf = r.informal_tokens.size();

  // Formal tokens sharing an origin form one group. Moves can interleave
  // groups; interleaved or overlapping groups are merged until every group
  // is contiguous on both sides.
  struct Group {
    Span informal;
    std::size_t first = 0;
    std::size_t last = 0;
  };
  std::vector<Group> groups;
  for (std::size_t k = 0; k < formal.size(); ++k) {
    const Work& w = *formal[k];
    Span origin = w.origin;
    origin.end = std::min(origin.end, n_inf);
    origin.begin = std::min(origin.begin, origin.end);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return !w.inserted() && g.informal == origin; });
    if (it == groups.end()) {
      groups.push_back({origin, k, k});
    } else {
      it->last = k;
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t g = 0; g < groups.size() && !changed; ++g) {
      for (std::size_t h = g + 1; h < groups.size() && !changed; ++h) {
        const Group& x = groups[g];
        const Group& y = groups[h];
        const bool formal_clash = x.first <= y.last && y.first <= x.last;
        if (!formal_clash && !x.informal.overlaps(y.informal)) continue;
        Group merged{hull(x.informal, y.informal), std::min(x.first, y.first), std::max(x.last, y.last)};
        groups[g] = merged;
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(h));
        changed = true;
      }
    }
  }
  std::vector<AlignmentLink> links;
  for (const Group& g : groups) links.push_back({g.informal, {g.first, g.last + 1}});

  auto covered = informal_cover(links, n_inf);
  // Empty formal spans sit after the formal tokens of earlier material.
  auto formal_position = [&](std::size_t informal_begin) {
    std::size_t f = 0;
    for (const Group& g : groups) {
      if (!g.informal.empty() && g.informal.end <= informal_begin) f = std::max(f, g.last + 1);
    }
    return f;
  };
  std::sort(state.deleted.begin(), state.deleted.end());
  for (const Span& d : state.deleted) {
    bool free = !d.empty() && d.end <= n_inf;
    for (std::size_t i = d.begin; free && i < d.end; ++i) free = covered[i] == 0;
    if (!free) continue;
    const std::size_t f = formal_position(d.begin);
    links.push_back({d, {f, f}});
    for (std::size_t i = d.begin; i < d.end; ++i) covered[i] = 1;
  }
  for (std::size_t i = 0; i < n_inf; ++i) {
    if (covered[i] == 0) {
      const std::size_t f = formal_position(i);
      links.push_back({{i, i + 1}, {f, f}});
    }
  }
  std::sort(links.begin(), links.end(), [](const AlignmentLink& a, const AlignmentLink& b) {
    if (a.informal.begin != b.informal.begin) return a.informal.begin < b.informal.begin;
    return a.formal.begin < b.formal.begin;
  });
  r.links = std::move(links);
  r.syntactic_change = syntactic_change_of(r.links);
}

ConversionResult Converter::convert(std::string_view informal, const ConverterConfig& config) const {
  ConversionResult result;
  const NormalizedText normalized = normalize_text(informal);
  result.emphasis_flags = normalized.emphasis_flags;
  for (const Token& tok : tokenize(normalized)) result.informal_tokens.push_back(tok.surface);

  State state{{}, {}, result};
  for (std::size_t i = 0; i < result.informal_tokens.size(); ++i) {
    auto [lead, core, trail] = split_punctuation(result.informal_tokens[i]);
    Work w;
    w.lead = std::move(lead);
    w.core = std::move(core);
    w.trail = std::move(trail);
    w.origin = {i, i + 1};
    w.resolved = w.core.empty();
    state.tokens.push_back(std::move(w));
  }

  // Stages feed each other (a disambiguated object marker satisfies a rule
  // guard, a moved verb meets a bare destination), so the pipeline repeats
  // on its own output until the text is stable.
  for (int round = 0; round < kMaxRounds; ++round) {
    const auto before = state.surfaces();
    if (round > 0) {
      for (auto& w : state.tokens) w.resolved = w.core.empty();
    }
    apply_lexicon(state);
    apply_rule_stages(state);
    apply_disambiguation(state, config);
    apply_phrase_morphology(state);
    if (config.syntactic_transforms) apply_syntactic(state);
    join_imperfective(state);
    for (auto& w : state.tokens) w.pending_comma = false;
    if (state.surfaces() == before) break;
  }
  finish(state);
  return result;
}

}  // namespace shekaste
