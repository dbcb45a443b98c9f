#include "adsieve/synth.hpp"

#include <cstdio>
#include <fstream>

#include "adsieve/error.hpp"
#include "adsieve/forest.hpp"
#include "adsieve/rng.hpp"
#include "adsieve/url.hpp"
#include "json.hpp"

namespace adsieve {
namespace {

constexpr int kAdNetworks = 5;
constexpr int kAdServers = 3;
constexpr int kTrackers = 3;

const std::vector<std::string> kSiteWords = {"news", "shop", "travel", "recipes", "sports",
                                              "garden", "music", "science", "local", "tech"};
const std::vector<std::string> kTlds = {".com", ".org", ".net", ".co.uk", ".io", ".de"};
const std::vector<std::string> kCdns = {"fastcdn.net", "staticlib.org", "fontsource.com",
                                        "imghost.io"};
const std::vector<std::string> kLibs = {"jquery", "lodash", "react", "polyfill", "analytics-lite"};
const std::vector<std::string> kSections = {"world", "story", "item", "post", "guide"};
const std::vector<std::string> kBoxClasses = {"content", "main", "row", "col", "nav",
                                              "article", "footer", "sidebar"};
const std::vector<std::string> kTextTags = {"span", "p", "div", "b", "em"};
const std::vector<std::string> kSlotIds = {"ad-top", "ad-side", "ad-bottom", "ad-inline"};
const std::vector<std::string> kAdWords = {"advert", "banner", "advertise"};
const std::vector<std::string> kAdSizes = {"300x250", "728x90", "160x600", "320x50"};

template <typename T>
const T& Pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.Below(v.size())];
}

std::string Hex(Rng& rng, int digits) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < digits; ++i) s += kHex[rng.Below(16)];
  return s;
}

class PageWriter {
 public:
  PageWriter(std::string page_url, std::uint64_t seed) {
    log_.page_url = std::move(page_url);
    log_.metadata["generator"] = "adsieve-synth";
    log_.metadata["seed"] = std::to_string(seed);
  }

  std::string Elem(const std::string& tag, std::optional<std::string> parent,
                   std::map<std::string, std::string> attrs = {},
                   std::optional<std::string> base = std::nullopt) {
    DomNode n;
    n.elem_id = "e" + std::to_string(next_elem_++);
    n.tag_name = tag;
    n.parent_id = std::move(parent);
    n.attributes = std::move(attrs);
    n.base_uri = base ? *base : (n.parent_id ? bases_.at(*n.parent_id) : log_.page_url);
    bases_[n.elem_id] = n.base_uri;
    std::string id = n.elem_id;
    Push(std::move(n));
    return id;
  }

  // Base URI inherited by later children of `id`.
  void SetChildBase(const std::string& id, const std::string& base) { bases_[id] = base; }

  void Request(const std::string& url, Initiator initiator, ResourceKind kind) {
    HttpRequest r;
    r.request_id = "r" + std::to_string(next_request_++);
    r.url = url;
    r.initiator = std::move(initiator);
    r.resource_kind = kind;
    Push(r);
  }

  std::string Script(const std::string& attached_to, std::optional<std::string> src) {
    ScriptUnit s;
    s.script_id = "s" + std::to_string(next_script_++);
    s.scope = src ? ScriptScope::kReferenced : ScriptScope::kInline;
    s.source_url = std::move(src);
    s.attached_to = attached_to;
    Push(s);
    return s.script_id;
  }

  void Interact(const std::string& script, const std::string& target, InteractionAction action) {
    Push(JsInteraction{script, target, action});
  }

  PageLoadLog Take() { return std::move(log_); }

 private:
  template <typename T>
  void Push(T payload) {
    log_.events.push_back(Event{seq_++, std::move(payload)});
  }

  PageLoadLog log_;
  std::int64_t seq_ = 0;
  int next_elem_ = 0;
  int next_script_ = 0;
  int next_request_ = 0;
  std::map<std::string, std::string> bases_;
};

Initiator ByElement(const std::string& id) { return {Initiator::Type::kElement, id}; }
Initiator ByParser() { return {}; }

class PageGenerator {
 public:
  PageGenerator(const CorpusSpec& spec, int index)
      : spec_(spec), index_(index), rng_(DeriveSeed(spec.seed, static_cast<std::uint64_t>(index))) {}

  SynthPage Run() {
    site_ = Pick(rng_, kSiteWords) + std::to_string(index_) + Pick(rng_, kTlds);
    host_ = rng_.Bernoulli(0.5) ? "www." + site_ : site_;
    const std::string page_url = (rng_.Bernoulli(0.3) ? "https://" : "http://") + host_ + "/";
    origin_ = page_url.substr(0, page_url.size() - 1);
    PageWriter w(page_url, spec_.seed);
    w_ = &w;

    w.Request(page_url, ByParser(), ResourceKind::kDocument);
    Mark(page_url, Label::kNonAd);
    const std::string html = w.Elem("html", std::nullopt);
    head_ = w.Elem("head", html);
    body_ = w.Elem("body", html);
    BuildSkeleton();

    const int benign = static_cast<int>(rng_.Between(spec_.benign_resources.lo, spec_.benign_resources.hi));
    const int chains = static_cast<int>(rng_.Between(spec_.ad_chains.lo, spec_.ad_chains.hi));
    // Interleave benign and ad content so positions vary across pages.
    std::vector<int> plan(static_cast<std::size_t>(benign), 0);
    plan.insert(plan.end(), static_cast<std::size_t>(chains), 1);
    for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[rng_.Below(i)]);
    int chain_index = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (plan[i] == 0) {
        Benign(static_cast<int>(i));
      } else {
        AdChain(chain_index++);
      }
    }
    if (rng_.Bernoulli(spec_.tracker_script_probability)) Tracker();

    SynthPage page;
    char id[32];
    std::snprintf(id, sizeof id, "page-%03d", index_);
    page.id = id;
    page.log = w.Take();
    page.intent = std::move(intent_);
    return page;
  }

 private:
  void Mark(const std::string& url, Label label) {
    intent_.emplace(ParseUrl(url).Serialize(), label);
  }

  void BuildSkeleton() {
    const int depth = static_cast<int>(rng_.Between(spec_.dom_depth.lo, spec_.dom_depth.hi));
    std::vector<std::string> level{body_};
    boxes_.push_back(body_);
    for (int d = 0; d < depth; ++d) {
      std::vector<std::string> next;
      for (const std::string& parent : level) {
        const int n = static_cast<int>(rng_.Between(1, 2));
        for (int i = 0; i < n; ++i) {
          std::map<std::string, std::string> attrs{{"class", Pick(rng_, kBoxClasses)}};
          if (rng_.Bernoulli(0.2)) attrs["id"] = Pick(rng_, kBoxClasses) + std::to_string(d);
          next.push_back(w_->Elem("div", parent, attrs));
        }
      }
      boxes_.insert(boxes_.end(), next.begin(), next.end());
      level = std::move(next);
    }
  }

  const std::string& Box() { return Pick(rng_, boxes_); }

  std::string BenignQuery() {
    switch (rng_.Below(4)) {
      case 0: return "?v=" + std::to_string(rng_.Between(1, 9));
      case 1: return "?id=" + std::to_string(rng_.Between(100, 999)) + "&lang=en";
      default: return "";
    }
  }

  void Benign(int j) {
    const std::string n = std::to_string(j);
    const auto roll = rng_.Below(100);
    if (roll < 28) {
      const std::string url = origin_ + "/images/photo" + n + ".jpg" + BenignQuery();
      const std::string img = w_->Elem("img", Box(), {{"src", url}});
      w_->Request(url, ByElement(img), ResourceKind::kImage);
      Mark(url, Label::kNonAd);
    } else if (roll < 48) {
      const std::string url = origin_ + "/" + Pick(rng_, kSections) + "/" + Hex(rng_, 6) + ".html" +
                              BenignQuery();
      w_->Elem("a", Box(), {{"href", url}});
      Mark(url, Label::kNonAd);
    } else if (roll < 56) {
      const std::string url = origin_ + "/css/site" + n + ".css";
      const std::string link = w_->Elem("link", head_, {{"href", url}, {"rel", "stylesheet"}});
      w_->Request(url, ByElement(link), ResourceKind::kStylesheet);
      Mark(url, Label::kNonAd);
    } else if (roll < 70) {
      const std::string url = origin_ + "/js/app" + n + ".js" + BenignQuery();
      w_->Request(url, ByParser(), ResourceKind::kScript);
      const std::string js = w_->Script(head_, url);
      Mark(url, Label::kNonAd);
      if (rng_.Bernoulli(0.5)) {
        const std::string button = w_->Elem("button", Box(), {{"class", "btn"}});
        w_->Interact(js, button, InteractionAction::kAttachListener);
      }
    } else if (roll < 82) {
      const std::string cdn = Pick(rng_, kCdns);
      const std::string url = "https://static." + cdn + "/libs/" + Pick(rng_, kLibs) + "-" +
                              std::to_string(rng_.Between(1, 4)) + ".min.js";
      w_->Request(url, ByParser(), ResourceKind::kScript);
      w_->Script(head_, url);
      Mark(url, Label::kNonAd);
    } else if (roll < 94) {
      const std::string url = "https://img." + Pick(rng_, kCdns) + "/photos/" + Hex(rng_, 8) + ".png";
      const std::string img = w_->Elem("img", Box(), {{"src", url}});
      w_->Request(url, ByElement(img), ResourceKind::kImage);
      Mark(url, Label::kNonAd);
    } else {
      const std::string js = w_->Script(head_, std::nullopt);
      const std::string span = w_->Elem("span", Box(), {{"class", "clock"}});
      w_->Interact(js, span, InteractionAction::kModifyAttribute);
    }
  }

  // third-party script -> inserted iframe -> nested creative with image.
  void AdChain(int k) {
    const int net = static_cast<int>(rng_.Below(kAdNetworks));
    const int server = static_cast<int>(rng_.Below(kAdServers));
    const std::string adnet = "adnet" + std::to_string(net) + ".com";
    const std::string adserve = "adserve" + std::to_string(server) + ".net";
    const bool keyword = rng_.Bernoulli(spec_.ad_keyword_probability);
    const std::string size = Pick(rng_, kAdSizes);

    std::map<std::string, std::string> slot_attrs{{"class", "ad-slot"}};
    if (k < static_cast<int>(kSlotIds.size())) slot_attrs["id"] = kSlotIds[k];
    const std::string slot = w_->Elem("div", Box(), slot_attrs);

    const std::string tag_url = "http://tags." + adnet + "/tag.js?pub=" + std::to_string(index_);
    w_->Request(tag_url, ByParser(), ResourceKind::kScript);
    const std::string tag_js = w_->Script(slot, tag_url);
    Mark(tag_url, Label::kAd);

    std::string frame_url = "http://serve." + adnet + "/";
    if (keyword) frame_url += Pick(rng_, kAdWords) + "/";
    if (rng_.Bernoulli(0.3)) {
      frame_url += "frame;slot=" + std::to_string(k) + ";sz=" + size;
    } else {
      frame_url += "frame?slot=" + std::to_string(k);
      if (rng_.Bernoulli(spec_.ad_keyword_probability)) frame_url += "&size=" + size;
      if (rng_.Bernoulli(0.5)) frame_url += "&ref=" + site_;
    }
    const std::string iframe = w_->Elem("iframe", slot, {{"src", frame_url}});
    w_->SetChildBase(iframe, frame_url);
    w_->Interact(tag_js, iframe, InteractionAction::kInsertNode);
    w_->Interact(tag_js, slot, InteractionAction::kModifyAttribute);
    w_->Request(frame_url, ByElement(iframe), ResourceKind::kIframe);
    Mark(frame_url, Label::kAd);

    // Creative document inside the frame.
    const std::string wrap = w_->Elem("div", iframe, {{"class", "creative"}});
    const int text = static_cast<int>(rng_.Between(4, 8));
    std::string parent = wrap;
    for (int i = 0; i < text; ++i) {
      const std::string e = w_->Elem(Pick(rng_, kTextTags), rng_.Bernoulli(0.5) ? wrap : parent);
      if (rng_.Bernoulli(0.3)) parent = e;
    }
    const std::string render_url = "http://cdn." + adserve + "/render.js";
    w_->Request(render_url, ByParser(), ResourceKind::kScript);
    const std::string render_js = w_->Script(wrap, render_url);
    Mark(render_url, Label::kAd);

    std::string creative_url = "http://img." + adserve + "/" +
                               (keyword ? Pick(rng_, kAdWords) : std::string("c")) + "/" +
                               Hex(rng_, 10) + ".gif";
    if (rng_.Bernoulli(0.5)) creative_url += "?dim=" + size;
    const std::string img = w_->Elem("img", wrap, {{"src", creative_url}});
    w_->Interact(render_js, img, InteractionAction::kInsertNode);
    w_->Request(creative_url, ByElement(img), ResourceKind::kImage);
    Mark(creative_url, Label::kAd);

    const std::string click_url = "http://click." + adnet + "/c?id=" + Hex(rng_, 8);
    w_->Elem("a", wrap, {{"href", click_url}});
    Mark(click_url, Label::kAd);

    if (net == 0) {
      // Matched by the exception rule.
      const std::string privacy = "http://" + adnet + "/privacy/info.html";
      w_->Elem("a", wrap, {{"href", privacy}});
      Mark(privacy, Label::kNonAd);
    }
  }

  void Tracker() {
    const std::string trk = "trk" + std::to_string(rng_.Below(kTrackers)) + ".io";
    const std::string js_url = "http://js." + trk + "/t.js";
    w_->Request(js_url, ByParser(), ResourceKind::kScript);
    const std::string js = w_->Script(head_, js_url);
    Mark(js_url, Label::kAd);
    w_->Interact(js, body_, InteractionAction::kAttachListener);

    std::string pixel = "http://pixel." + trk + "/p.gif?ref=" + site_;
    if (rng_.Bernoulli(0.6)) pixel += "&screenwidth=1280&screenheight=800";
    const std::string img = w_->Elem("img", body_, {{"src", pixel}, {"width", "1"}});
    w_->Interact(js, img, InteractionAction::kInsertNode);
    w_->Request(pixel, ByElement(img), ResourceKind::kImage);
    Mark(pixel, Label::kAd);
  }

  const CorpusSpec& spec_;
  int index_;
  Rng rng_;
  PageWriter* w_ = nullptr;
  std::string site_;
  std::string host_;
  std::string origin_;
  std::string head_;
  std::string body_;
  std::vector<std::string> boxes_;
  std::map<std::string, Label> intent_;
};

}  // namespace

void CorpusSpec::Validate() const {
  auto range = [](const IntRange& r, const char* name, int min) {
    if (r.lo > r.hi || r.lo < min) {
      throw ConfigError(std::string(name) + " range [" + std::to_string(r.lo) + ", " +
                        std::to_string(r.hi) + "] is empty or below " + std::to_string(min));
    }
  };
  if (n_pages < 1) throw ConfigError("n_pages must be positive");
  range(dom_depth, "dom_depth", 0);
  range(benign_resources, "benign_resources", 0);
  range(ad_chains, "ad_chains", 0);
  for (double p : {ad_keyword_probability, tracker_script_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability outside [0, 1]");
  }
}

SynthPage GeneratePage(const CorpusSpec& spec, int index) {
  spec.Validate();
  return PageGenerator(spec, index).Run();
}

Corpus GenerateCorpus(const CorpusSpec& spec, int workers) {
  spec.Validate();
  Corpus corpus;
  corpus.pages.resize(static_cast<std::size_t>(spec.n_pages));
  ParallelFor(corpus.pages.size(), workers, [&](std::size_t i) {
    corpus.pages[i] = PageGenerator(spec, static_cast<int>(i)).Run();
  });
  if (spec.companion_filters) corpus.filters = CompanionFilterList();
  return corpus;
}

std::string CompanionFilterList() {
  std::string out = "[Adblock Plus 2.0]\n! synthetic companion list\n";
  for (int i = 0; i < kAdNetworks; ++i) out += "||adnet" + std::to_string(i) + ".com^\n";
  for (int i = 0; i < kAdServers; ++i) out += "||adserve" + std::to_string(i) + ".net^$third-party\n";
  for (int i = 0; i < kTrackers; ++i) out += "||trk" + std::to_string(i) + ".io^\n";
  out += "@@||adnet0.com/privacy/\n";
  out += "##.ad-slot\n";
  for (const auto& id : kSlotIds) out += "###" + id + "\n";
  out += "! rules that match nothing in this corpus\n";
  for (int i = 0; i < 12; ++i) out += "||legacy-ads" + std::to_string(i) + ".com^\n";
  out += "||popunder.biz^$script\n";
  out += "||doubleserve.net^$image,third-party\n";
  out += "/pagead/*\n";
  out += "/adframe.\n";
  out += "_adbanner_\n";
  out += "|http://ads.\n";
  out += "||metrics.example^$domain=shop1.com\n";
  out += "@@||legacy-ads0.com/ok/\n";
  out += "##.sponsored-box\n";
  out += "###promo-strip\n";
  return out;
}

std::string IntentLabelsToJson(const Corpus& corpus, std::string_view config_hash) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  auto& pages = j["pages"] = nlohmann::ordered_json::object();
  for (const SynthPage& page : corpus.pages) {
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [url, label] : page.intent) labels[url] = ToString(label);
    pages[page.id] = std::move(labels);
  }
  return j.dump(2) + "\n";
}

std::map<std::string, std::map<std::string, Label>> IntentLabelsFromJson(std::string_view text) {
  std::map<std::string, std::map<std::string, Label>> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [page, labels] : j.at("pages").items()) {
      auto& dst = out[page];
      for (const auto& [url, value] : labels.items()) {
        auto label = ParseLabel(value.get<std::string>());
        if (!label) throw DataError("intent labels: bad label for " + url);
        dst[url] = *label;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("intent labels: ") + e.what());
  }
  return out;
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir,
                 std::string_view config_hash) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "pages");
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
  };
  for (const SynthPage& page : corpus.pages) {
    PageLoadLog log = page.log;
    if (!config_hash.empty()) log.metadata["config_hash"] = std::string(config_hash);
    write(dir / "pages" / (page.id + ".jsonl"), SerializeLog(log));
  }
  if (!corpus.filters.empty()) {
    std::string header;
    if (!config_hash.empty()) header = "! config_hash=" + std::string(config_hash) + "\n";
    write(dir / "filters.txt", header + corpus.filters);
  }
  write(dir / "intent_labels.json", IntentLabelsToJson(corpus, config_hash));
}

}  // namespace adsieve
