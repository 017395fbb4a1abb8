#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/word.hpp"

namespace cospect {

// Right-multiplication coset automaton for a finite-index subgroup.
// table[state][2*(g-1)] is the state after multiplying by generator g,
// table[state][2*(g-1)+1] after g^{-1}. State 0 is the subgroup itself.
struct CosetTable {
  std::vector<std::vector<int32_t>> table;

  int states() const { return static_cast<int>(table.size()); }

  void validate(int generator_count) const {
    require(!table.empty(), errc::invalid_argument, "coset table has no states");
    int n = states();
    for (const auto& row : table)
      require(static_cast<int>(row.size()) == 2 * generator_count, errc::invalid_argument,
              "coset table row width must be 2 * generator count");
    for (int g = 0; g < generator_count; ++g) {
      std::vector<char> seen(static_cast<size_t>(n), 0);
      for (int s = 0; s < n; ++s) {
        int32_t t = table[static_cast<size_t>(s)][static_cast<size_t>(2 * g)];
        require(t >= 0 && t < n, errc::index_out_of_range, "coset table entry out of range");
        require(!seen[static_cast<size_t>(t)], errc::invalid_argument,
                "coset table generator column is not a permutation");
        seen[static_cast<size_t>(t)] = 1;
        // inverse column must invert the forward column
        require(table[static_cast<size_t>(t)][static_cast<size_t>(2 * g + 1)] == s,
                errc::invalid_argument, "coset table inverse column inconsistent");
      }
    }
  }

  int32_t step(int32_t state, int32_t letter) const {
    int g = (letter > 0 ? letter : -letter) - 1;
    return table[static_cast<size_t>(state)][static_cast<size_t>(2 * g + (letter > 0 ? 0 : 1))];
  }
};

// Incremental membership of the walk position in a fixed subgroup.
class MembershipTracker {
public:
  virtual ~MembershipTracker() = default;
  virtual void reset() = 0;
  virtual void push(const Word& atom) = 0;
  virtual bool contains() const = 0;
};

enum class SubgroupKind { trivial, whole, kernel_of_hom, cyclic_generator, finite_index_table };

// Membership and right-coset keys for the supported subgroup families.
// coset_key(w1) == coset_key(w2)  iff  w1 * w2^{-1} is in the subgroup.
class SubgroupOracle {
public:
  static SubgroupOracle trivial(MarkedGroup g) {
    return SubgroupOracle(SubgroupKind::trivial, std::move(g));
  }

  static SubgroupOracle whole(MarkedGroup g) {
    return SubgroupOracle(SubgroupKind::whole, std::move(g));
  }

  static SubgroupOracle kernel_of_hom(GroupHomomorphism hom) {
    SubgroupOracle s(SubgroupKind::kernel_of_hom, hom.source());
    s.hom_ = std::make_shared<GroupHomomorphism>(std::move(hom));
    return s;
  }

  static SubgroupOracle cyclic_generator(MarkedGroup g, int gen_1based) {
    require(g.family() == GroupFamily::free_group, errc::unsupported_kind,
            "CyclicGenerator subgroup needs a free ambient group");
    require(gen_1based >= 1 && gen_1based <= g.generator_count(), errc::index_out_of_range,
            "cyclic generator index");
    SubgroupOracle s(SubgroupKind::cyclic_generator, std::move(g));
    s.cyclic_gen_ = gen_1based;
    return s;
  }

  static SubgroupOracle finite_index_table(MarkedGroup g, CosetTable table) {
    table.validate(g.generator_count());
    SubgroupOracle s(SubgroupKind::finite_index_table, std::move(g));
    s.table_ = std::make_shared<CosetTable>(std::move(table));
    return s;
  }

  SubgroupKind kind() const { return kind_; }
  const MarkedGroup& group() const { return group_; }

  bool contains(const Word& w) const {
    switch (kind_) {
      case SubgroupKind::trivial: return group_.is_identity(w);
      case SubgroupKind::whole: group_.validate(w); return true;
      case SubgroupKind::kernel_of_hom: return hom_->target().is_identity(hom_->evaluate(w));
      case SubgroupKind::cyclic_generator: {
        Word nf = group_.normal_form(w);
        int32_t a = cyclic_gen_;
        for (int32_t l : nf.letters)
          if (l != a && l != -a) return false;
        return true;
      }
      case SubgroupKind::finite_index_table: {
        group_.validate(w);
        int32_t s = 0;
        for (int32_t l : w.letters) s = table_->step(s, l);
        return s == 0;
      }
    }
    return false;
  }

  std::string coset_key(const Word& w) const {
    switch (kind_) {
      case SubgroupKind::trivial: return group_.key_bytes(group_.normal_form(w));
      case SubgroupKind::whole: group_.validate(w); return std::string();
      case SubgroupKind::kernel_of_hom: {
        Word img = hom_->evaluate(w);
        return hom_->target().key_bytes(img);
      }
      case SubgroupKind::cyclic_generator: {
        // strip the maximal power of the generator on the left
        Word nf = group_.normal_form(w);
        size_t i = 0;
        int32_t a = cyclic_gen_;
        while (i < nf.letters.size() && (nf.letters[i] == a || nf.letters[i] == -a)) ++i;
        Word rep(std::vector<int32_t>(nf.letters.begin() + static_cast<long>(i), nf.letters.end()));
        return group_.key_bytes(rep);
      }
      case SubgroupKind::finite_index_table: {
        group_.validate(w);
        int32_t s = 0;
        for (int32_t l : w.letters) s = table_->step(s, l);
        return std::string(reinterpret_cast<const char*>(&s), sizeof(s));
      }
    }
    return std::string();
  }

  std::unique_ptr<MembershipTracker> tracker() const;

private:
  SubgroupOracle(SubgroupKind k, MarkedGroup g) : kind_(k), group_(std::move(g)) {}

  SubgroupKind kind_;
  MarkedGroup group_;
  std::shared_ptr<GroupHomomorphism> hom_;
  int cyclic_gen_ = 0;
  std::shared_ptr<CosetTable> table_;

  friend class TrivialTracker;
  friend class WholeTracker;
  friend class KernelTracker;
  friend class CyclicGenTracker;
  friend class TableTracker;
};

class TrivialTracker final : public MembershipTracker {
public:
  explicit TrivialTracker(const MarkedGroup& g) : pos_(g) {}
  void reset() override { pos_.reset(); }
  void push(const Word& atom) override { pos_.push_word(atom); }
  bool contains() const override { return pos_.at_identity(); }

private:
  WalkState pos_;
};

class WholeTracker final : public MembershipTracker {
public:
  void reset() override {}
  void push(const Word&) override {}
  bool contains() const override { return true; }
};

class KernelTracker final : public MembershipTracker {
public:
  explicit KernelTracker(std::shared_ptr<GroupHomomorphism> hom)
      : hom_(std::move(hom)), image_pos_(hom_->target()) {}
  void reset() override { image_pos_.reset(); }
  void push(const Word& atom) override {
    for (int32_t l : atom.letters)
      image_pos_.push_word(l > 0 ? hom_->image(l) : hom_->inverse_image(-l));
  }
  bool contains() const override { return image_pos_.at_identity(); }

private:
  std::shared_ptr<GroupHomomorphism> hom_;
  WalkState image_pos_;
};

// Position is in <a> iff its reduced word has no letters off the a-axis.
class CyclicGenTracker final : public MembershipTracker {
public:
  CyclicGenTracker(const MarkedGroup& g, int gen_1based) : pos_(g), gen_(gen_1based) {}
  void reset() override {
    pos_.reset();
    off_axis_ = 0;
  }
  void push(const Word& atom) override {
    for (int32_t l : atom.letters) {
      size_t before = pos_.length();
      pos_.push_letter(l);
      bool appended = pos_.length() > before;
      int32_t affected = appended ? l : -l;  // letter added, or the cancelled one
      if (affected != gen_ && affected != -gen_) off_axis_ += appended ? 1 : -1;
    }
  }
  bool contains() const override { return off_axis_ == 0; }

private:
  WalkState pos_;
  int gen_;
  int64_t off_axis_ = 0;
};

class TableTracker final : public MembershipTracker {
public:
  explicit TableTracker(std::shared_ptr<CosetTable> t) : table_(std::move(t)) {}
  void reset() override { state_ = 0; }
  void push(const Word& atom) override {
    for (int32_t l : atom.letters) state_ = table_->step(state_, l);
  }
  bool contains() const override { return state_ == 0; }

private:
  std::shared_ptr<CosetTable> table_;
  int32_t state_ = 0;
};

inline std::unique_ptr<MembershipTracker> SubgroupOracle::tracker() const {
  switch (kind_) {
    case SubgroupKind::trivial: return std::make_unique<TrivialTracker>(group_);
    case SubgroupKind::whole: return std::make_unique<WholeTracker>();
    case SubgroupKind::kernel_of_hom: return std::make_unique<KernelTracker>(hom_);
    case SubgroupKind::cyclic_generator:
      return std::make_unique<CyclicGenTracker>(group_, cyclic_gen_);
    case SubgroupKind::finite_index_table: return std::make_unique<TableTracker>(table_);
  }
  return nullptr;
}

}  // namespace cospect
