#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "cospect/errors.hpp"

namespace cospect {

// A word over marked generators. Letter i>0 means generator i, i<0 its
// inverse (1-based, matching the external signed-integer serialization).
struct Word {
  std::vector<int32_t> letters;

  Word() = default;
  explicit Word(std::vector<int32_t> ls) : letters(std::move(ls)) {}

  bool empty() const { return letters.empty(); }
  size_t size() const { return letters.size(); }
  bool operator==(const Word& o) const { return letters == o.letters; }
  bool operator!=(const Word& o) const { return letters != o.letters; }
};

inline Word word_of(std::initializer_list<int32_t> ls) { return Word(std::vector<int32_t>(ls)); }

enum class GroupFamily { free_group, free_abelian, cyclic_finite, direct_product };

// Finitely generated group with a solvable word problem over one of four
// families. All values are immutable after construction.
class MarkedGroup {
public:
  static MarkedGroup free_group(int rank) {
    require(rank >= 1, errc::invalid_argument, "free group rank must be >= 1");
    require(rank <= 32767, errc::invalid_argument,
            "free group rank capped at 32767 (letters are 16-bit in coset keys)");
    MarkedGroup g;
    g.family_ = GroupFamily::free_group;
    g.gen_count_ = rank;
    return g;
  }

  static MarkedGroup free_abelian(int rank) {
    require(rank >= 1, errc::invalid_argument, "free abelian rank must be >= 1");
    MarkedGroup g;
    g.family_ = GroupFamily::free_abelian;
    g.gen_count_ = rank;
    return g;
  }

  static MarkedGroup cyclic_finite(int order) {
    require(order >= 1, errc::invalid_argument, "cyclic order must be >= 1");
    MarkedGroup g;
    g.family_ = GroupFamily::cyclic_finite;
    g.gen_count_ = 1;
    g.cyclic_order_ = order;
    return g;
  }

  static MarkedGroup direct_product(std::vector<MarkedGroup> factors) {
    require(!factors.empty(), errc::invalid_argument, "direct product needs >= 1 factor");
    MarkedGroup g;
    g.family_ = GroupFamily::direct_product;
    g.factors_ = std::move(factors);
    g.gen_count_ = 0;
    for (const auto& f : g.factors_) {
      g.offsets_.push_back(g.gen_count_);
      g.gen_count_ += f.generator_count();
    }
    return g;
  }

  GroupFamily family() const { return family_; }
  int generator_count() const { return gen_count_; }
  int cyclic_order() const { return cyclic_order_; }
  const std::vector<MarkedGroup>& factors() const { return factors_; }
  size_t max_word_letters() const { return max_letters_; }
  void set_max_word_letters(size_t cap) { max_letters_ = cap; }

  void validate(const Word& w) const {
    for (int32_t l : w.letters) {
      int32_t g = l >= 0 ? l : -l;
      require(g >= 1 && g <= gen_count_, errc::index_out_of_range,
              "letter " + std::to_string(l) + " outside 1.." + std::to_string(gen_count_));
    }
    check_length(w.size());
  }

  Word normal_form(const Word& w) const {
    validate(w);
    return reduce(w);
  }

  Word multiply(const Word& a, const Word& b) const {
    validate(a);
    validate(b);
    Word ab;
    ab.letters.reserve(a.size() + b.size());
    ab.letters.insert(ab.letters.end(), a.letters.begin(), a.letters.end());
    ab.letters.insert(ab.letters.end(), b.letters.begin(), b.letters.end());
    check_length(ab.size());
    return reduce(ab);
  }

  Word inverse(const Word& w) const {
    validate(w);
    Word r;
    r.letters.reserve(w.size());
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) r.letters.push_back(-*it);
    return reduce(r);
  }

  bool is_identity(const Word& w) const { return normal_form(w).empty(); }

  // Canonical bytes of a normal form; equal group elements map to equal bytes.
  std::string key_bytes(const Word& nf) const {
    std::string out;
    append_key_bytes(nf, out);
    return out;
  }

private:
  MarkedGroup() = default;

  void check_length(size_t n) const {
    require(n <= max_letters_, errc::word_too_long,
            "word exceeds " + std::to_string(max_letters_) + " letters");
  }

  Word reduce(const Word& w) const {
    switch (family_) {
      case GroupFamily::free_group: {
        Word out;
        out.letters.reserve(w.size());
        for (int32_t l : w.letters) {
          if (!out.letters.empty() && out.letters.back() == -l)
            out.letters.pop_back();
          else
            out.letters.push_back(l);
        }
        return out;
      }
      case GroupFamily::free_abelian: {
        std::vector<int64_t> exps(gen_count_, 0);
        for (int32_t l : w.letters) exps[(l > 0 ? l : -l) - 1] += (l > 0 ? 1 : -1);
        return word_from_exps(exps);
      }
      case GroupFamily::cyclic_finite: {
        int64_t e = 0;
        for (int32_t l : w.letters) e += (l > 0 ? 1 : -1);
        e %= cyclic_order_;
        if (e < 0) e += cyclic_order_;
        Word out;
        out.letters.assign(static_cast<size_t>(e), 1);
        return out;
      }
      case GroupFamily::direct_product: {
        // letters of distinct factors commute; within a factor order is kept
        std::vector<Word> locals(factors_.size());
        for (int32_t l : w.letters) {
          int g = (l > 0 ? l : -l);
          size_t f = factor_of(g);
          int local = g - offsets_[f];
          locals[f].letters.push_back(l > 0 ? local : -local);
        }
        Word out;
        for (size_t f = 0; f < factors_.size(); ++f) {
          Word nf = factors_[f].reduce(locals[f]);
          for (int32_t l : nf.letters)
            out.letters.push_back(l > 0 ? l + offsets_[f] : -(-l + offsets_[f]));
        }
        check_length(out.size());
        return out;
      }
    }
    return Word();
  }

  Word word_from_exps(const std::vector<int64_t>& exps) const {
    size_t total = 0;
    for (int64_t e : exps) total += static_cast<size_t>(e < 0 ? -e : e);
    check_length(total);
    Word out;
    out.letters.reserve(total);
    for (int g = 0; g < gen_count_; ++g) {
      int64_t e = exps[g];
      for (int64_t i = 0; i < (e < 0 ? -e : e); ++i) out.letters.push_back(e > 0 ? g + 1 : -(g + 1));
    }
    return out;
  }

  size_t factor_of(int gen_1based) const {
    size_t f = 0;
    while (f + 1 < offsets_.size() && gen_1based > offsets_[f + 1]) ++f;
    return f;
  }

  void append_key_bytes(const Word& nf, std::string& out) const {
    auto put32 = [&out](int64_t v) {
      uint32_t u = static_cast<uint32_t>(static_cast<int32_t>(v));
      out.push_back(static_cast<char>(u & 0xff));
      out.push_back(static_cast<char>((u >> 8) & 0xff));
      out.push_back(static_cast<char>((u >> 16) & 0xff));
      out.push_back(static_cast<char>((u >> 24) & 0xff));
    };
    switch (family_) {
      case GroupFamily::free_group:
        for (int32_t l : nf.letters) {
          // gen count < 2^15 after validation; two bytes per letter
          uint16_t u = static_cast<uint16_t>(static_cast<int16_t>(l));
          out.push_back(static_cast<char>(u & 0xff));
          out.push_back(static_cast<char>((u >> 8) & 0xff));
        }
        break;
      case GroupFamily::free_abelian: {
        std::vector<int64_t> exps(gen_count_, 0);
        for (int32_t l : nf.letters) exps[(l > 0 ? l : -l) - 1] += (l > 0 ? 1 : -1);
        for (int64_t e : exps) put32(e);
        break;
      }
      case GroupFamily::cyclic_finite:
        put32(static_cast<int64_t>(nf.letters.size()));
        break;
      case GroupFamily::direct_product: {
        std::vector<Word> locals(factors_.size());
        for (int32_t l : nf.letters) {
          int g = (l > 0 ? l : -l);
          size_t f = factor_of(g);
          int local = g - offsets_[f];
          locals[f].letters.push_back(l > 0 ? local : -local);
        }
        for (size_t f = 0; f < factors_.size(); ++f) {
          std::string sub = factors_[f].key_bytes(locals[f]);
          put32(static_cast<int64_t>(sub.size()));
          out += sub;
        }
        break;
      }
    }
  }

  GroupFamily family_ = GroupFamily::free_group;
  int gen_count_ = 0;
  int cyclic_order_ = 0;
  std::vector<MarkedGroup> factors_;
  std::vector<int> offsets_;
  size_t max_letters_ = 1000000;  // exceeding the cap is an error, never silent truncation
};

// Incremental right-multiplication state: position <- position * atom.
// Amortized O(1) per letter for every family; this is the walk hot path.
class WalkState {
public:
  explicit WalkState(const MarkedGroup& g) : group_(&g) {
    switch (g.family()) {
      case GroupFamily::free_group:
        break;
      case GroupFamily::free_abelian:
        exps_.assign(static_cast<size_t>(g.generator_count()), 0);
        break;
      case GroupFamily::cyclic_finite:
        break;
      case GroupFamily::direct_product:
        for (const auto& f : g.factors()) children_.emplace_back(f);
        break;
    }
  }

  void reset() {
    stack_.clear();
    std::fill(exps_.begin(), exps_.end(), 0);
    nonzero_ = 0;
    cyc_ = 0;
    for (auto& c : children_) c.reset();
  }

  void push_letter(int32_t l) {
    switch (group_->family()) {
      case GroupFamily::free_group:
        if (!stack_.empty() && stack_.back() == -l)
          stack_.pop_back();
        else
          stack_.push_back(l);
        break;
      case GroupFamily::free_abelian: {
        size_t g = static_cast<size_t>((l > 0 ? l : -l) - 1);
        int64_t before = exps_[g];
        exps_[g] += (l > 0 ? 1 : -1);
        if (before == 0) ++nonzero_;
        if (exps_[g] == 0) --nonzero_;
        break;
      }
      case GroupFamily::cyclic_finite: {
        int n = group_->cyclic_order();
        cyc_ = (cyc_ + (l > 0 ? 1 : n - 1)) % n;
        break;
      }
      case GroupFamily::direct_product: {
        int g = (l > 0 ? l : -l);
        size_t f = 0;
        int base = 0;
        for (; f < group_->factors().size(); ++f) {
          int k = group_->factors()[f].generator_count();
          if (g <= base + k) break;
          base += k;
        }
        children_[f].push_letter(l > 0 ? g - base : -(g - base));
        break;
      }
    }
  }

  void push_word(const Word& atom) {
    for (int32_t l : atom.letters) push_letter(l);
  }

  bool at_identity() const {
    switch (group_->family()) {
      case GroupFamily::free_group: return stack_.empty();
      case GroupFamily::free_abelian: return nonzero_ == 0;
      case GroupFamily::cyclic_finite: return cyc_ == 0;
      case GroupFamily::direct_product:
        for (const auto& c : children_)
          if (!c.at_identity()) return false;
        return true;
    }
    return true;
  }

  // normal-form length of the current position
  size_t length() const {
    switch (group_->family()) {
      case GroupFamily::free_group: return stack_.size();
      case GroupFamily::free_abelian: {
        size_t n = 0;
        for (int64_t e : exps_) n += static_cast<size_t>(e < 0 ? -e : e);
        return n;
      }
      case GroupFamily::cyclic_finite: return static_cast<size_t>(cyc_);
      case GroupFamily::direct_product: {
        size_t n = 0;
        for (const auto& c : children_) n += c.length();
        return n;
      }
    }
    return 0;
  }

  Word word() const {
    switch (group_->family()) {
      case GroupFamily::free_group: return Word(stack_);
      case GroupFamily::free_abelian: {
        Word w;
        for (size_t g = 0; g < exps_.size(); ++g) {
          int64_t e = exps_[g];
          for (int64_t i = 0; i < (e < 0 ? -e : e); ++i)
            w.letters.push_back(e > 0 ? static_cast<int32_t>(g + 1) : -static_cast<int32_t>(g + 1));
        }
        return w;
      }
      case GroupFamily::cyclic_finite: {
        Word w;
        w.letters.assign(static_cast<size_t>(cyc_), 1);
        return w;
      }
      case GroupFamily::direct_product: {
        Word w;
        int base = 0;
        for (size_t f = 0; f < children_.size(); ++f) {
          Word sub = children_[f].word();
          for (int32_t l : sub.letters) w.letters.push_back(l > 0 ? l + base : l - base);
          base += group_->factors()[f].generator_count();
        }
        return w;
      }
    }
    return Word();
  }

  Word inverse_word() const {
    Word w = word();
    Word r;
    r.letters.reserve(w.size());
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) r.letters.push_back(-*it);
    return group_->normal_form(r);
  }

  const MarkedGroup& group() const { return *group_; }

private:
  const MarkedGroup* group_;
  std::vector<int32_t> stack_;   // free
  std::vector<int64_t> exps_;    // free abelian
  int nonzero_ = 0;
  int cyc_ = 0;                  // cyclic
  std::vector<WalkState> children_;  // product
};

// Generator-wise homomorphism; kernels of these are the subgroup workhorse.
class GroupHomomorphism {
public:
  GroupHomomorphism(MarkedGroup source, MarkedGroup target, std::vector<Word> images)
      : source_(std::move(source)), target_(std::move(target)) {
    require(static_cast<int>(images.size()) == source_.generator_count(), errc::index_out_of_range,
            "need one image per source generator");
    for (auto& w : images) {
      images_.push_back(target_.normal_form(w));
      inverse_images_.push_back(target_.inverse(images_.back()));
    }
  }

  const MarkedGroup& source() const { return source_; }
  const MarkedGroup& target() const { return target_; }
  const Word& image(int gen_1based) const { return images_[static_cast<size_t>(gen_1based - 1)]; }
  const Word& inverse_image(int gen_1based) const {
    return inverse_images_[static_cast<size_t>(gen_1based - 1)];
  }

  Word evaluate(const Word& w) const {
    source_.validate(w);
    WalkState acc(target_);
    for (int32_t l : w.letters)
      acc.push_word(l > 0 ? images_[static_cast<size_t>(l - 1)]
                          : inverse_images_[static_cast<size_t>(-l - 1)]);
    return acc.word();
  }

private:
  MarkedGroup source_;
  MarkedGroup target_;
  std::vector<Word> images_;
  std::vector<Word> inverse_images_;
};

}  // namespace cospect
