// Pairs of groups with peripheral collections on truncations: coset
// snapshots, truncated Hausdorff distances, the coset relation induced by a
// map, and malnormality and commensurability certificates.
//
// Every measurement is taken inside ball(r) and only points of the interior
// ball(floor(r/2)) are queried, so boundary effects stay out of the values.

#ifndef RELPAIR_PAIRS_HPP_
#define RELPAIR_PAIRS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "fineness.hpp"
#include "graphs.hpp"
#include "parallel.hpp"

namespace relpair {

  inline std::size_t interior_radius(std::size_t r) noexcept {
    return r / 2;
  }

  struct CosetRef {
    std::size_t pid = 0;
    Word        rep;  // shortlex-least element

    bool operator==(CosetRef const&) const = default;
  };

  struct CosetLess {
    bool operator()(CosetRef const& a, CosetRef const& b) const {
      if (a.pid != b.pid) {
        return a.pid < b.pid;
      }
      return shortlex_less(a.rep, b.rep);
    }
  };

  inline CosetRef coset_of(CosetOracle const& cosets, std::size_t pid, Word const& g) {
    Word nf = cosets.structure().ambient().normal_form(g).word;
    return {pid, cosets.rep(pid, nf)};
  }

  inline std::string coset_name(CosetRef const& c, RelativePresentation const& rp) {
    return vertex_name(Vertex::coset(c.pid, c.rep), rp);
  }

  namespace detail {
    // Elements within `depth` steps of x along paths that stay in ball(bound).
    inline std::vector<Word> near(WordProblem const& wp, Word const& x, std::size_t depth,
                                  std::size_t bound = unreachable) {
      std::vector<Word>                     out = {x};
      std::unordered_set<Word, WordHash>    seen = {x};
      std::size_t                           begin = 0;
      for (std::size_t d = 0; d < depth; ++d) {
        std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
          for (std::size_t code = 0; code < 2 * wp.alphabet_size(); ++code) {
            Letter s = Letter::from_code(static_cast<std::uint16_t>(code));
            Word   y = wp.multiply(out[i], Word{s});
            if (y.size() <= bound && seen.insert(y).second) {
              out.push_back(std::move(y));
            }
          }
        }
        begin = end;
      }
      return out;
    }

    // Distance from x to the coset c along paths inside ball(bound), searched
    // up to depth.
    inline std::optional<std::size_t> distance_to_coset(CosetOracle const& cosets, Word const& x,
                                                        CosetRef const& c, std::size_t depth,
                                                        std::size_t bound) {
      auto const&                        wp = cosets.structure().ambient();
      std::vector<Word>                  layer = {x};
      std::unordered_set<Word, WordHash> seen  = {x};
      for (std::size_t d = 0;; ++d) {
        for (auto const& y : layer) {
          if (cosets.rep(c.pid, y) == c.rep) {
            return d;
          }
        }
        if (d == depth || layer.empty()) {
          return std::nullopt;
        }
        std::vector<Word> next;
        for (auto const& y : layer) {
          for (std::size_t code = 0; code < 2 * wp.alphabet_size(); ++code) {
            Word z = wp.multiply(y, Word{Letter::from_code(static_cast<std::uint16_t>(code))});
            if (z.size() <= bound && seen.insert(z).second) {
              next.push_back(std::move(z));
            }
          }
        }
        layer = std::move(next);
      }
    }

    inline bool structure_tainted(PeripheralStructure const& ps) {
      bool t = !ps.ambient().exact();
      for (std::size_t pid = 0; pid < ps.count(); ++pid) {
        t = t || !ps.exact(pid);
      }
      return t;
    }
  }  // namespace detail

  // A coset intersected with ball(r), with its k-neighbourhoods in ball(r).
  struct CosetBallSnapshot {
    CosetRef                       coset;
    std::size_t                    radius = 0;
    std::vector<Word>              members;
    std::vector<std::vector<Word>> neighborhoods;  // [k], shortlex; [0] == members
  };

  inline CosetBallSnapshot coset_ball(PeripheralStructure const& ps, Word const& g, std::size_t pid,
                                      std::size_t r, std::size_t k_max = 0) {
    CosetOracle       cosets(ps);
    CosetBallSnapshot snap{coset_of(cosets, pid, g), r, {}, {}};
    snap.members = cosets.members(pid, snap.coset.rep, r);

    auto                     ball = element_ball(ps.ambient(), r);
    std::vector<std::size_t> dist(ball.size(), unreachable);
    std::deque<std::size_t>  queue;
    for (auto const& m : snap.members) {
      auto i = *ball.find(m);
      dist[i] = 0;
      queue.push_back(i);
    }
    while (!queue.empty()) {
      auto i = queue.front();
      queue.pop_front();
      if (dist[i] == k_max) {
        continue;
      }
      for (auto [s, j] : ball.neighbors[i]) {
        if (dist[j] == unreachable) {
          dist[j] = dist[i] + 1;
          queue.push_back(j);
        }
      }
    }
    snap.neighborhoods.resize(k_max + 1);
    for (std::size_t i = 0; i < ball.size(); ++i) {
      for (std::size_t k = dist[i]; k <= k_max && dist[i] != unreachable; ++k) {
        snap.neighborhoods[k].push_back(ball.elements[i]);
      }
    }
    return snap;
  }

  // Larger of the two directed sups over interior points of ball(r). Each
  // distance is searched to depth r; a point that does not reach the other
  // coset counts as r + 1 and unguards the measurement.
  inline Measurement hausdorff_at(CosetOracle const& cosets, CosetRef const& a, CosetRef const& b,
                                  std::size_t r) {
    Measurement m{r, 0, true};
    if (a == b) {
      return m;
    }
    std::size_t const rho    = interior_radius(r);
    bool              points = false;
    for (auto [x, y] : {std::pair{&a, &b}, std::pair{&b, &a}}) {
      for (auto const& p : cosets.members(x->pid, x->rep, rho)) {
        points = true;
        auto d = detail::distance_to_coset(cosets, p, *y, r, unreachable);
        if (!d) {
          m.guarded = false;
        }
        m.value = std::max(m.value, d ? *d : r + 1);
      }
    }
    m.guarded = m.guarded && points;
    return m;
  }

  inline TruncatedVerdict hausdorff_truncated(PeripheralStructure const& ps, CosetRef const& a,
                                              CosetRef const& b, std::vector<std::size_t> const& radii,
                                              std::size_t threads = 1) {
    auto evidence = parallel_map(radii.size(), threads, [&](std::size_t i) {
      CosetOracle cosets(ps);
      return hausdorff_at(cosets, a, b, radii[i]);
    });
    auto const& rp = ps.presentation();
    return classify("Hausdorff distance between " + coset_name(a, rp) + " and " + coset_name(b, rp),
                    std::move(evidence), detail::structure_tainted(ps));
  }

  // Hausdorff verdicts name a stable series by its bound.
  inline nlohmann::json hausdorff_json(TruncatedVerdict const& v) {
    auto j = to_json(v);
    if (v.status == VerdictStatus::certified_stable) {
      j["status"] = "BoundedCertificate";
      j["bound"]  = v.evidence.back().value;
    }
    return j;
  }

  // ---------------------------------------------------------------------------
  // Malnormality

  struct MalnormalResult {
    bool             equal_cosets = false;
    TruncatedVerdict verdict;
    std::vector<Word> witness;  // intersection at the largest radius
  };

  // |N_n(A) n N_n(B)| over interior points of ball(r).
  inline Measurement neighborhood_intersection(CosetOracle const& cosets, CosetRef const& a,
                                               CosetRef const& b, std::size_t n, std::size_t r,
                                               std::vector<Word>* witness = nullptr) {
    auto const& wp = cosets.structure().ambient();
    Measurement m{r, 0, true};
    auto        ball = element_ball(wp, interior_radius(r));
    for (auto const& x : ball.elements) {
      bool in_a = false, in_b = false;
      for (auto const& y : detail::near(wp, x, n, r)) {
        in_a = in_a || cosets.rep(a.pid, y) == a.rep;
        in_b = in_b || cosets.rep(b.pid, y) == b.rep;
      }
      if (in_a && in_b) {
        ++m.value;
        if (witness) {
          witness->push_back(x);
        }
      }
    }
    return m;
  }

  inline MalnormalResult malnormal_check(PeripheralStructure const& ps, CosetRef const& a,
                                         CosetRef const& b, std::size_t n,
                                         std::vector<std::size_t> const& radii, std::size_t threads = 1) {
    MalnormalResult res;
    auto const&     rp = ps.presentation();
    std::string     quantity = "|N_" + std::to_string(n) + "(" + coset_name(a, rp) + ") n N_"
                           + std::to_string(n) + "(" + coset_name(b, rp) + ")|";
    if (a == b) {
      res.equal_cosets    = true;
      res.verdict.quantity = quantity;
      res.verdict.reason   = "equal cosets are excluded";
      return res;
    }
    std::vector<std::vector<Word>> witnesses(radii.size());
    auto evidence = parallel_map(radii.size(), threads, [&](std::size_t i) {
      CosetOracle cosets(ps);
      return neighborhood_intersection(cosets, a, b, n, radii[i], &witnesses[i]);
    });
    res.verdict = classify(quantity, std::move(evidence), detail::structure_tainted(ps));
    if (!witnesses.empty()) {
      res.witness = std::move(witnesses.back());
    }
    return res;
  }

  inline nlohmann::json to_json(MalnormalResult const& r, RelativePresentation const& rp) {
    auto j = to_json(r.verdict);
    if (r.equal_cosets) {
      j["status"] = "EqualCosets";
    }
    j["witness"] = nlohmann::json::array();
    for (auto const& w : r.witness) {
      j["witness"].push_back(rp.word_to_string(w));
    }
    return j;
  }

  struct MalnormalSweep {
    std::size_t                                  ball_radius = 0;
    std::size_t                                  n           = 0;
    std::vector<std::size_t>                     radii;
    std::vector<CosetRef>                        cosets;  // cosets meeting the ball
    std::size_t                                  pairs = 0;
    std::map<VerdictStatus, std::size_t>         counts;
    // Pairs that are not certified stable, with their verdicts.
    std::vector<std::tuple<CosetRef, CosetRef, TruncatedVerdict>> flagged;
  };

  // Every pair of distinct cosets meeting ball(ball_radius). Intersections
  // are counted once per interior point x by collecting the cosets within n
  // of x; pairs never seen have an all-zero series.
  inline MalnormalSweep malnormal_sweep(PeripheralStructure const& ps, std::size_t ball_radius,
                                        std::size_t n, std::vector<std::size_t> const& radii,
                                        std::size_t threads = 1) {
    MalnormalSweep sweep{ball_radius, n, radii, {}, 0, {}, {}};
    auto const&    wp = ps.ambient();
    {
      CosetOracle                   cosets(ps);
      std::set<CosetRef, CosetLess> found;
      for (auto const& g : element_ball(wp, ball_radius).elements) {
        for (std::size_t pid = 0; pid < ps.count(); ++pid) {
          found.insert(CosetRef{pid, cosets.rep(pid, g)});
        }
      }
      sweep.cosets.assign(found.begin(), found.end());
    }
    std::map<CosetRef, std::size_t, CosetLess> index;
    for (std::size_t i = 0; i < sweep.cosets.size(); ++i) {
      index[sweep.cosets[i]] = i;
    }
    std::size_t const k = sweep.cosets.size();
    sweep.pairs         = k * (k - (k > 0 ? 1 : 0)) / 2;

    using Counts = std::map<std::pair<std::size_t, std::size_t>, std::size_t>;
    auto per_radius = parallel_map(radii.size(), threads, [&](std::size_t i) {
      CosetOracle cosets(ps);
      Counts      counts;
      std::size_t r = radii[i];
      for (auto const& x : element_ball(wp, interior_radius(r)).elements) {
        std::set<std::size_t> here;
        for (auto const& y : detail::near(wp, x, n, r)) {
          for (std::size_t pid = 0; pid < ps.count(); ++pid) {
            auto it = index.find(CosetRef{pid, cosets.rep(pid, y)});
            if (it != index.end()) {
              here.insert(it->second);
            }
          }
        }
        for (auto p = here.begin(); p != here.end(); ++p) {
          for (auto q = std::next(p); q != here.end(); ++q) {
            ++counts[{*p, *q}];
          }
        }
      }
      return counts;
    });

    bool const tainted = detail::structure_tainted(ps);
    auto       series  = [&](std::pair<std::size_t, std::size_t> key) {
      std::vector<Measurement> ev;
      for (std::size_t i = 0; i < radii.size(); ++i) {
        auto it = per_radius[i].find(key);
        ev.push_back({radii[i], it == per_radius[i].end() ? 0 : it->second, true});
      }
      return classify("|N_" + std::to_string(n) + "(A) n N_" + std::to_string(n) + "(B)|",
                      std::move(ev), tainted);
    };
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto const& counts : per_radius) {
      for (auto const& [key, c] : counts) {
        seen.insert(key);
      }
    }
    for (auto key : seen) {
      auto v = series(key);
      ++sweep.counts[v.status];
      if (v.status != VerdictStatus::certified_stable) {
        sweep.flagged.emplace_back(sweep.cosets[key.first], sweep.cosets[key.second], std::move(v));
      }
    }
    if (sweep.pairs > seen.size()) {
      auto zero = series({k, k});
      sweep.counts[zero.status] += sweep.pairs - seen.size();
    }
    return sweep;
  }

  inline nlohmann::json to_json(MalnormalSweep const& s, RelativePresentation const& rp) {
    nlohmann::json j;
    j["ball_radius"] = s.ball_radius;
    j["n"]           = s.n;
    j["radii"]       = s.radii;
    j["cosets"]      = s.cosets.size();
    j["pairs"]       = s.pairs;
    for (auto st : {VerdictStatus::certified_stable, VerdictStatus::growth_detected,
                    VerdictStatus::inconclusive}) {
      auto it = s.counts.find(st);
      j["counts"][to_string(st)] = it == s.counts.end() ? 0 : it->second;
    }
    j["flagged"] = nlohmann::json::array();
    for (auto const& [a, b, v] : s.flagged) {
      auto f = to_json(v);
      f["A"] = coset_name(a, rp);
      f["B"] = coset_name(b, rp);
      j["flagged"].push_back(std::move(f));
    }
    j["scope"] = "evidence at the listed truncation radii only";
    return j;
  }

  // ---------------------------------------------------------------------------
  // Commensurability

  struct ReducedSpotCheck {
    std::size_t   p = 0, q = 0;
    Word          g;
    VerdictStatus status = VerdictStatus::inconclusive;
    bool          violation = false;  // bounded although P != Q or g not in P
  };

  struct CommensurabilityReport {
    TruncatedVerdict              verdict;
    std::vector<ReducedSpotCheck> spot_checks;
  };

  // Hausdorff certificate for P_p and g P_q, plus spot checks of the reduced
  // condition over every g in ball(sample_radius) and every peripheral pair.
  inline CommensurabilityReport commensurability_certificate(PeripheralStructure const& ps,
                                                             std::size_t p, Word const& g, std::size_t q,
                                                             std::vector<std::size_t> const& radii,
                                                             std::size_t sample_radius = 1,
                                                             std::size_t threads       = 1) {
    CosetOracle            cosets(ps);
    CommensurabilityReport rep;
    rep.verdict = hausdorff_truncated(ps, CosetRef{p, {}}, coset_of(cosets, q, g), radii, threads);
    for (auto const& h : element_ball(ps.ambient(), sample_radius).elements) {
      for (std::size_t i = 0; i < ps.count(); ++i) {
        for (std::size_t j = 0; j < ps.count(); ++j) {
          auto v = hausdorff_truncated(ps, CosetRef{i, {}}, coset_of(cosets, j, h), radii, threads);
          bool trivial = i == j && cosets.rep(i, h).empty();
          rep.spot_checks.push_back(
              {i, j, h, v.status, v.status == VerdictStatus::certified_stable && !trivial});
        }
      }
    }
    return rep;
  }

  inline nlohmann::json to_json(CommensurabilityReport const& r, RelativePresentation const& rp) {
    nlohmann::json j = hausdorff_json(r.verdict);
    j["spot_checks"] = nlohmann::json::array();
    bool reduced     = true;
    for (auto const& c : r.spot_checks) {
      j["spot_checks"].push_back({{"P", rp.peripherals[c.p].name},
                                  {"Q", rp.peripherals[c.q].name},
                                  {"g", rp.word_to_string(c.g)},
                                  {"status", c.status == VerdictStatus::certified_stable
                                                 ? std::string("BoundedCertificate")
                                                 : to_string(c.status)},
                                  {"violation", c.violation}});
      reduced = reduced && !c.violation;
    }
    j["reduced_at_scale"] = reduced;
    return j;
  }

  // ---------------------------------------------------------------------------
  // Maps between pairs

  struct QIMap {
    enum class Kind { identity, substitution, table } kind = Kind::identity;
    std::vector<Word>                 images;  // substitution: image of each source generator
    std::map<Word, Word, ShortlexLess> table;  // table: source normal form -> target word

    // Target normal form of the image of a source normal form; nullopt for
    // elements a table does not cover.
    std::optional<Word> apply(Word const& g, WordProblem const& target) const {
      switch (kind) {
        case Kind::identity: return target.normal_form(g).word;
        case Kind::substitution: {
          Word w;
          for (Letter x : g) {
            auto const& img = images.at(x.index());
            if (x.inverted()) {
              auto inv = inverse(img);
              w.insert(w.end(), inv.begin(), inv.end());
            } else {
              w.insert(w.end(), img.begin(), img.end());
            }
          }
          return target.normal_form(w).word;
        }
        default: {
          auto it = table.find(g);
          if (it == table.end()) {
            return std::nullopt;
          }
          return target.normal_form(it->second).word;
        }
      }
    }
  };

  struct QIPairSpec {
    RelativePresentation     source, target;
    QIMap                    map;
    double                   L = 1, C = 0, M = 1;
    std::vector<std::size_t> radii = {4};
    std::uint64_t            seed  = 1;
    // peripheral name -> generators of its commensurator, as source words
    std::map<std::string, std::vector<Word>> commensurators;
  };

  // A presentation with its word problem and peripheral structure; pinned in
  // memory because the structure points at the other two.
  struct PairSide {
    RelativePresentation rp;
    WordProblem          wp;
    PeripheralStructure  ps;

    explicit PairSide(RelativePresentation p) : rp(std::move(p)), wp(rp), ps(rp, wp) {}
    PairSide(PairSide const&)            = delete;
    PairSide& operator=(PairSide const&) = delete;
  };

  struct QIValidation {
    std::size_t radius     = 0;
    std::size_t pairs      = 0;
    std::size_t violations = 0;
    std::size_t unmapped   = 0;
    bool        tainted    = false;

    bool ok() const noexcept {
      return violations == 0;
    }
  };

  class QIPair {
   public:
    explicit QIPair(QIPairSpec spec)
        : spec_(std::move(spec)),
          source_(std::make_unique<PairSide>(spec_.source)),
          target_(std::make_unique<PairSide>(spec_.target)) {
      if (spec_.map.kind == QIMap::Kind::identity
          && spec_.source.alphabet_size() != spec_.target.alphabet_size()) {
        throw Error("identity map needs matching generating sets");
      }
      if (spec_.map.kind == QIMap::Kind::substitution
          && spec_.map.images.size() != spec_.source.alphabet_size()) {
        throw Error("substitution map must give an image for every source generator");
      }
      if (!(spec_.L >= 1) || !(spec_.C >= 0) || !(spec_.M >= 0)) {
        throw Error("constants must satisfy L >= 1, C >= 0, M >= 0");
      }
    }

    QIPairSpec const& spec() const noexcept {
      return spec_;
    }
    PairSide const& source() const noexcept {
      return *source_;
    }
    PairSide const& target() const noexcept {
      return *target_;
    }
    std::optional<Word> image(Word const& g) const {
      return spec_.map.apply(g, target_->wp);
    }
    bool tainted() const {
      return detail::structure_tainted(source_->ps) || detail::structure_tainted(target_->ps);
    }

    // Checks the (L, C) inequalities on pairs of the interior ball; all pairs
    // when there are at most max_pairs, otherwise a seeded sample.
    QIValidation validate(std::size_t r, std::size_t max_pairs = 4000) const {
      QIValidation v;
      v.radius  = r;
      v.tainted = tainted();
      auto ball = element_ball(source_->wp, interior_radius(r));
      std::vector<std::optional<Word>> img;
      for (auto const& g : ball.elements) {
        img.push_back(image(g));
        v.unmapped += !img.back().has_value();
      }
      auto check = [&](std::size_t i, std::size_t j) {
        if (!img[i] || !img[j]) {
          return;
        }
        double d  = static_cast<double>(source_->wp.distance(ball.elements[i], ball.elements[j]));
        double d2 = static_cast<double>(target_->wp.distance(*img[i], *img[j]));
        ++v.pairs;
        double const eps = 1e-9;
        if (d2 > spec_.L * d + spec_.C + eps || d2 + eps < d / spec_.L - spec_.C) {
          ++v.violations;
        }
      };
      std::size_t const n = ball.size();
      if (n * (n - 1) / 2 <= max_pairs) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) {
            check(i, j);
          }
        }
      } else {
        std::mt19937_64 rng(spec_.seed);
        for (std::size_t k = 0; k < max_pairs; ++k) {
          check(static_cast<std::size_t>(rng() % n), static_cast<std::size_t>(rng() % n));
        }
      }
      return v;
    }

   private:
    QIPairSpec                spec_;
    std::unique_ptr<PairSide> source_, target_;
  };

  struct DotQRelation {
    double                M            = 1;
    std::size_t           radius       = 0;
    std::size_t           source_guard = 0;
    std::size_t           target_guard = 0;
    std::vector<CosetRef> source_cosets;  // meeting the source interior ball
    std::vector<CosetRef> target_cosets;  // meeting the target interior ball
    std::vector<std::pair<CosetRef, CosetRef>> pairs;
    // Target cosets with no preimage candidate inside the truncation.
    std::vector<CosetRef> excluded;
  };

  // Interior radius on the target side: preimages of its points lie in the
  // source interior by the lower quasi-isometry bound.
  inline std::size_t target_guard(std::size_t rho, double L, double C) {
    double g = std::floor(static_cast<double>(rho) / L - C);
    return g <= 0 ? 0 : static_cast<std::size_t>(g);
  }

  // Pairs (A, B) of cosets with truncated Hdist(q(A), B) < M: every point of
  // A n ball(r) maps within M of B, and every interior point of B lies within
  // M of the image of A n ball(r).
  inline DotQRelation dot_q(QIPair const& pair, double M, std::size_t r) {
    auto const& S = pair.source();
    auto const& T = pair.target();
    CosetOracle sc(S.ps), tc(T.ps);

    DotQRelation rel;
    rel.M            = M;
    rel.radius       = r;
    rel.source_guard = interior_radius(r);
    rel.target_guard = target_guard(rel.source_guard, pair.spec().L, pair.spec().C);
    if (M <= 0) {
      return rel;
    }
    std::size_t const depth = static_cast<std::size_t>(std::ceil(M)) - 1;

    auto                                                    sball = element_ball(S.wp, r);
    std::vector<std::optional<Word>>                        img(sball.size());
    std::unordered_map<Word, std::vector<std::size_t>, WordHash> pre;
    for (std::size_t i = 0; i < sball.size(); ++i) {
      img[i] = pair.image(sball.elements[i]);
      if (img[i]) {
        pre[*img[i]].push_back(i);
      }
    }
    auto image_of = [&](Word const& x) -> std::optional<Word> const& { return img[*sball.find(x)]; };

    std::set<CosetRef, CosetLess> sources, targets;
    for (std::size_t i = 0; i < sball.size() && sball.elements[i].size() <= rel.source_guard; ++i) {
      for (std::size_t pid = 0; pid < S.ps.count(); ++pid) {
        sources.insert(CosetRef{pid, sc.rep(pid, sball.elements[i])});
      }
    }
    for (auto const& y : element_ball(T.wp, rel.target_guard).elements) {
      for (std::size_t pid = 0; pid < T.ps.count(); ++pid) {
        targets.insert(CosetRef{pid, tc.rep(pid, y)});
      }
    }
    rel.source_cosets.assign(sources.begin(), sources.end());
    rel.target_cosets.assign(targets.begin(), targets.end());

    auto close = [&](CosetRef const& a, CosetRef const& b) {
      for (auto const& x : sc.members(a.pid, a.rep, r)) {
        auto const& qx = image_of(x);
        if (!qx) {
          return false;
        }
        bool hit = false;
        for (auto const& y : detail::near(T.wp, *qx, depth)) {
          if (tc.rep(b.pid, y) == b.rep) {
            hit = true;
            break;
          }
        }
        if (!hit) {
          return false;
        }
      }
      for (auto const& y : tc.members(b.pid, b.rep, rel.target_guard)) {
        bool hit = false;
        for (auto const& z : detail::near(T.wp, y, depth)) {
          auto it = pre.find(z);
          if (it == pre.end()) {
            continue;
          }
          for (auto i : it->second) {
            if (sc.rep(a.pid, sball.elements[i]) == a.rep) {
              hit = true;
              break;
            }
          }
          if (hit) {
            break;
          }
        }
        if (!hit) {
          return false;
        }
      }
      return true;
    };

    struct PairLess {
      bool operator()(std::pair<CosetRef, CosetRef> const& u,
                      std::pair<CosetRef, CosetRef> const& v) const {
        CosetLess less;
        if (less(u.first, v.first) || less(v.first, u.first)) {
          return less(u.first, v.first);
        }
        return less(u.second, v.second);
      }
    };
    std::map<std::pair<CosetRef, CosetRef>, bool, PairLess> tested;
    auto test = [&](CosetRef const& a, CosetRef const& b) {
      auto key = std::make_pair(a, b);
      if (auto it = tested.find(key); it != tested.end()) {
        return it->second;
      }
      return tested[key] = close(a, b);
    };

    for (auto const& a : rel.source_cosets) {
      std::set<CosetRef, CosetLess> cands;
      for (auto const& x : sc.members(a.pid, a.rep, rel.source_guard)) {
        if (auto const& qx = image_of(x)) {
          for (auto const& y : detail::near(T.wp, *qx, depth)) {
            for (std::size_t pid = 0; pid < T.ps.count(); ++pid) {
              cands.insert(CosetRef{pid, tc.rep(pid, y)});
            }
          }
        }
      }
      for (auto const& b : cands) {
        test(a, b);
      }
    }
    for (auto const& b : rel.target_cosets) {
      std::set<CosetRef, CosetLess> cands;
      for (auto const& y : tc.members(b.pid, b.rep, rel.target_guard)) {
        for (auto const& z : detail::near(T.wp, y, depth)) {
          auto it = pre.find(z);
          if (it == pre.end()) {
            continue;
          }
          for (auto i : it->second) {
            for (std::size_t pid = 0; pid < S.ps.count(); ++pid) {
              cands.insert(CosetRef{pid, sc.rep(pid, sball.elements[i])});
            }
          }
        }
      }
      if (cands.empty()) {
        rel.excluded.push_back(b);
      }
      for (auto const& a : cands) {
        test(a, b);
      }
    }
    for (auto const& [key, ok] : tested) {
      if (ok) {
        rel.pairs.push_back(key);
      }
    }
    return rel;
  }

  struct PairQIReport {
    DotQRelation relation;
    QIValidation validation;
    bool         source_surjective = false;
    bool         target_surjective = false;
    bool         function          = false;
    bool         injective         = false;
    bool         bijection         = false;
    bool         tainted           = false;

    bool pass() const noexcept {
      return validation.ok() && source_surjective && target_surjective;
    }
  };

  inline PairQIReport check_pair_qi(QIPair const& pair, std::size_t r, std::optional<double> M = {}) {
    PairQIReport rep;
    rep.relation   = dot_q(pair, M.value_or(pair.spec().M), r);
    rep.validation = pair.validate(r);
    rep.tainted    = pair.tainted();
    auto const& rel = rep.relation;

    std::map<CosetRef, std::size_t, CosetLess> out_deg, in_deg;
    for (auto const& [a, b] : rel.pairs) {
      ++out_deg[a];
      ++in_deg[b];
    }
    std::set<CosetRef, CosetLess> excluded(rel.excluded.begin(), rel.excluded.end());
    rep.source_surjective = rep.function = true;
    for (auto const& a : rel.source_cosets) {
      std::size_t d = out_deg.count(a) ? out_deg[a] : 0;
      rep.source_surjective = rep.source_surjective && d > 0;
      rep.function          = rep.function && d == 1;
    }
    rep.target_surjective = rep.injective = true;
    for (auto const& b : rel.target_cosets) {
      if (excluded.count(b)) {
        continue;
      }
      std::size_t d = in_deg.count(b) ? in_deg[b] : 0;
      rep.target_surjective = rep.target_surjective && d > 0;
      rep.injective         = rep.injective && d <= 1;
    }
    rep.bijection = rep.function && rep.injective && rep.target_surjective;
    return rep;
  }

  inline nlohmann::json to_json(PairQIReport const& r, QIPair const& pair) {
    auto const&    rel = r.relation;
    nlohmann::json j;
    j["status"]       = r.pass() ? "PASS" : "FAIL";
    j["M"]            = rel.M;
    j["radius"]       = rel.radius;
    j["source_guard"] = rel.source_guard;
    j["target_guard"] = rel.target_guard;
    j["validation"]   = {{"radius", r.validation.radius},
                         {"pairs", r.validation.pairs},
                         {"violations", r.validation.violations},
                         {"unmapped", r.validation.unmapped}};
    j["source_cosets"]     = rel.source_cosets.size();
    j["target_cosets"]     = rel.target_cosets.size();
    j["excluded"]          = rel.excluded.size();
    j["source_surjective"] = r.source_surjective;
    j["target_surjective"] = r.target_surjective;
    j["function"]          = r.function;
    j["injective"]         = r.injective;
    j["bijection"]         = r.bijection;
    j["tainted"]           = r.tainted;
    j["pairs"]             = nlohmann::json::array();
    for (auto const& [a, b] : rel.pairs) {
      j["pairs"].push_back({coset_name(a, pair.source().rp), coset_name(b, pair.target().rp)});
    }
    j["note"] = "function and bijection criteria presuppose reduced peripheral collections; "
                "evidence at this truncation only";
    return j;
  }

  // ---------------------------------------------------------------------------
  // Induced map on coned-off graphs

  struct HatQReport {
    std::string status = "Inconclusive";  // PASS, FAIL or Inconclusive
    std::string reason;
    std::size_t interior_vertices = 0;
    std::size_t pairs             = 0;
    double      L_hat             = 1;
    std::size_t C_hat             = 0;
    double      path_ratio        = 0;  // max |image path| / |path|
    std::size_t paths             = 0;
    std::size_t cone_checks       = 0;
    std::size_t cone_failures     = 0;
    std::size_t skipped_paths     = 0;  // image left the target truncation
  };

  // Extends q by the coset relation (which must be a function) to the
  // coned-off truncations, measures its distortion on interior pairs and
  // checks that sampled geodesics meet a cone exactly when their images meet
  // the image cone.
  inline HatQReport induced_hat_q_check(QIPair const& pair, std::size_t r,
                                        std::size_t max_paths = 500) {
    HatQReport  rep;
    auto const& S    = pair.source();
    auto const& T    = pair.target();
    auto const& spec = pair.spec();
    auto        rel  = dot_q(pair, spec.M, r);
    if (rel.source_cosets.size() < 2) {
      rep.reason = "insufficient interior: fewer than two cosets meet the interior ball";
      return rep;
    }
    std::map<CosetRef, std::vector<CosetRef>, CosetLess> qdot;
    for (auto const& [a, b] : rel.pairs) {
      qdot[a].push_back(b);
    }
    for (auto const& a : rel.source_cosets) {
      if (qdot[a].size() != 1) {
        rep.reason = "coset relation is not a function on the truncation";
        return rep;
      }
    }

    auto g = build_coned_off(S.ps, r);
    auto h = build_coned_off(
        T.ps, static_cast<std::size_t>(std::ceil(spec.L * static_cast<double>(r) + spec.C)));
    std::size_t const rho = rel.source_guard;

    std::vector<std::size_t>                interior;
    std::vector<std::optional<std::size_t>> hat(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
      auto const& vx = g.vertices[v];
      if (vx.word.size() > rho) {
        continue;
      }
      if (vx.cone) {
        auto it = qdot.find(CosetRef{vx.pid, vx.word});
        if (it != qdot.end()) {
          hat[v] = h.find(Vertex::coset(it->second[0].pid, it->second[0].rep));
        }
      } else if (auto q = pair.image(vx.word)) {
        hat[v] = h.find_element(*q);
      }
      if (hat[v]) {
        interior.push_back(v);
      }
    }
    rep.interior_vertices = interior.size();
    if (interior.size() < 2) {
      rep.reason = "insufficient interior";
      return rep;
    }

    std::vector<std::pair<std::size_t, std::size_t>> dd;
    for (auto u : interior) {
      auto du = distances_from(g, u);
      auto dh = distances_from(h, *hat[u]);
      for (auto v : interior) {
        if (v > u && du[v] != unreachable && dh[*hat[v]] != unreachable) {
          dd.emplace_back(du[v], dh[*hat[v]]);
        }
      }
    }
    rep.pairs = dd.size();
    for (auto [d, e] : dd) {
      if (d > 0 && e > 0) {
        rep.L_hat = std::max({rep.L_hat, static_cast<double>(e) / d, static_cast<double>(d) / e});
      }
    }
    for (auto [d, e] : dd) {
      double de = static_cast<double>(d), ee = static_cast<double>(e);
      double c  = std::max({0.0, ee - rep.L_hat * de, de / rep.L_hat - ee});
      rep.C_hat = std::max(rep.C_hat, static_cast<std::size_t>(std::ceil(c - 1e-9)));
    }

    // geodesic in g from u to v through BFS parents
    auto geodesic = [](Graph const& gr, std::size_t u, std::size_t v) {
      std::vector<std::size_t> parent(gr.size(), unreachable);
      std::deque<std::size_t>  queue = {u};
      parent[u]                      = u;
      while (!queue.empty() && parent[v] == unreachable) {
        auto x = queue.front();
        queue.pop_front();
        for (auto y : gr.neighbors(x)) {
          if (parent[y] == unreachable) {
            parent[y] = x;
            queue.push_back(y);
          }
        }
      }
      std::vector<std::size_t> path;
      if (parent[v] == unreachable) {
        return path;
      }
      for (auto x = v; x != u; x = parent[x]) {
        path.push_back(x);
      }
      path.push_back(u);
      std::reverse(path.begin(), path.end());
      return path;
    };

    std::vector<std::pair<std::size_t, std::size_t>> samples;
    for (std::size_t i = 0; i < interior.size(); ++i) {
      for (std::size_t j = i + 1; j < interior.size(); ++j) {
        samples.emplace_back(interior[i], interior[j]);
      }
    }
    if (samples.size() > max_paths) {
      std::mt19937_64 rng(spec.seed);
      std::vector<std::pair<std::size_t, std::size_t>> picked;
      for (std::size_t k = 0; k < max_paths; ++k) {
        picked.push_back(samples[static_cast<std::size_t>(rng() % samples.size())]);
      }
      samples = std::move(picked);
    }

    for (auto [u, v] : samples) {
      auto alpha = geodesic(g, u, v);
      if (alpha.size() < 2) {
        continue;
      }
      std::vector<std::size_t> image;
      bool                     ok = true;
      auto                     append = [&](std::size_t x) {
        if (image.empty() || image.back() != x) {
          image.push_back(x);
        }
      };
      auto vertex_image = [&](std::size_t x) -> std::optional<std::size_t> {
        if (hat[x]) {
          return hat[x];
        }
        auto const& vx = g.vertices[x];
        if (vx.cone) {
          auto it = qdot.find(CosetRef{vx.pid, vx.word});
          if (it == qdot.end() || it->second.size() != 1) {
            return std::nullopt;
          }
          return h.find(Vertex::coset(it->second[0].pid, it->second[0].rep));
        }
        auto q = pair.image(vx.word);
        return q ? h.find_element(*q) : std::nullopt;
      };
      for (std::size_t k = 0; k + 1 < alpha.size() && ok; ++k) {
        auto a = vertex_image(alpha[k]), b = vertex_image(alpha[k + 1]);
        if (!a || !b) {
          ok = false;
          break;
        }
        append(*a);
        auto const& va = g.vertices[alpha[k]];
        auto const& vb = g.vertices[alpha[k + 1]];
        if (!va.cone && !vb.cone && spec.map.kind == QIMap::Kind::substitution) {
          Word step = S.wp.multiply(inverse(va.word), vb.word);
          Word cur  = h.vertices[*a].word;
          Word img  =spec.map.images.at(step.at(0).index());
          if (step[0].inverted()) {
            img = inverse(img);
          }
          for (Letter t : img) {
            cur    = T.wp.multiply(cur, Word{t});
            auto x = h.find_element(cur);
            if (!x) {
              ok = false;
              break;
            }
            append(*x);
          }
        } else if (*a != *b && !h.adjacent(*a, *b)) {
          auto link = geodesic(h, *a, *b);
          if (link.empty()) {
            ok = false;
            break;
          }
          for (auto x : link) {
            append(x);
          }
        }
        append(*b);
      }
      if (!ok) {
        ++rep.skipped_paths;
        continue;
      }
      ++rep.paths;
      rep.path_ratio = std::max(rep.path_ratio, static_cast<double>(image.size() - 1)
                                                    / static_cast<double>(alpha.size() - 1));
      std::set<std::size_t> on_alpha(alpha.begin(), alpha.end()), on_image(image.begin(), image.end());
      for (auto c : interior) {
        if (!g.vertices[c].cone) {
          continue;
        }
        ++rep.cone_checks;
        rep.cone_failures += on_alpha.count(c) != on_image.count(*hat[c]);
      }
    }
    rep.status = rep.cone_failures == 0 && rep.paths > 0 ? "PASS" : rep.paths == 0 ? "Inconclusive" : "FAIL";
    if (rep.paths == 0) {
      rep.reason = "no sampled path stayed inside the truncation";
    }
    return rep;
  }

  inline nlohmann::json to_json(HatQReport const& r) {
    return {{"status", r.status},
            {"reason", r.reason},
            {"interior_vertices", r.interior_vertices},
            {"pairs", r.pairs},
            {"L_hat", r.L_hat},
            {"C_hat", r.C_hat},
            {"path_ratio", r.path_ratio},
            {"paths", r.paths},
            {"skipped_paths", r.skipped_paths},
            {"cone_checks", r.cone_checks},
            {"cone_failures", r.cone_failures},
            {"scope", "evidence at this truncation only"}};
  }

  // ---------------------------------------------------------------------------
  // Refinement from supplied commensurator generators

  // Replaces each listed peripheral by the subgroup its supplied generators
  // generate. Pairwise commuting generators give a free abelian strategy,
  // others a free one.
  inline RelativePresentation refined_presentation(RelativePresentation const& rp,
                                                   WordProblem const&          wp,
                                                   std::map<std::string, std::vector<Word>> const& comm) {
    if (comm.empty()) {
      throw Unsupported("refinement needs commensurator generators for each peripheral subgroup");
    }
    RelativePresentation out = rp;
    for (auto const& [name, gens] : comm) {
      auto pid = out.peripheral_index(name);
      if (!pid) {
        throw UndeclaredSymbol(name);
      }
      if (gens.empty()) {
        throw Error("empty commensurator for " + name);
      }
      auto& p   = out.peripherals[*pid];
      bool  ab  = true;
      for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
          ab = ab && wp.equal(concat(gens[i], gens[j]), concat(gens[j], gens[i]));
        }
      }
      p.inclusion = gens;
      p.listed.clear();
      for (auto const& w : gens) {
        if (w.size() == 1 && !w[0].inverted()) {
          p.listed.push_back(w[0].index());
        }
      }
      p.table_path        = "";
      p.strategy_inferred = true;
      if (ab) {
        p.strategy = FreeAbelianStrategy{gens.size()};
      } else {
        p.strategy = FreeStrategy{gens.size()};
      }
    }
    return out;
  }

}  // namespace relpair

#endif  // RELPAIR_PAIRS_HPP_
