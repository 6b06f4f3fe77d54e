#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlr/config.hpp"
#include "rlr/database.hpp"
#include "rlr/schema.hpp"

namespace rlr {

/// Generative description of a random relational world whose target labels
/// are drawn from an RLR model.
struct SynthSpec {
  struct PopulationSpec {
    std::string name;
    std::size_t size = 0;
  };
  struct AttributeSpec {
    AttributeDecl decl;
    /// Boolean: P(true). Categorical: ignored (uniform). Continuous: values
    /// are uniform in [-probability, probability].
    double probability = 0.5;
  };
  struct RelationSpec {
    RelationDecl decl;
    /// Independent probability of each pair; self pairs are skipped when
    /// both sides are the same population.
    double density = 0.0;
  };
  struct WeightedText {
    std::string formula;
    double weight = 0.0;
  };

  std::vector<PopulationSpec> populations;
  std::vector<AttributeSpec> attributes;
  std::vector<RelationSpec> relations;
  /// Must be a boolean attribute or a two-valued categorical one declared in
  /// `attributes`; its values are sampled, not drawn.
  TargetSpec target;
  std::vector<WeightedText> formulas;
  /// Attributes used to draw labels but left out of the returned database.
  std::vector<std::string> unobserved;
  std::uint64_t seed = 0;
};

/// Friends-and-kindness world: person population, kind(person) with rate
/// 0.5, friend(person, person) with density 0.018, label happy(z) drawn from
/// sigmoid(-4.5 + #kind friends).
SynthSpec kindFriendsSpec(std::size_t people, std::uint64_t seed);

struct SyntheticData {
  RelationalDatabase db;
  /// Including unobserved attributes.
  RelationalDatabase full;
  TargetSpec target;
  /// Label probability per target individual.
  std::vector<double> probabilities;
};

SyntheticData generateSynthetic(const SynthSpec& spec);

/// Config keys understood by synthFromConfig.
const std::set<std::string, std::less<>>& synthConfigKeys();

/// Builds a spec from `synth.*` lines:
///   synth.population = person 500
///   synth.attribute  = kind person boolean 0.5
///   synth.attribute  = colour person categorical red,green,blue
///   synth.attribute  = taste movie continuous 1.0
///   synth.relation   = friend person person 0.018
///   synth.target     = happy person z true
///   synth.wf         = -4.5 True
///   synth.wf         = 1 friend(z,y) * kind(y)
///   synth.unobserved = taste
/// `synth.preset = kind-friends` with `synth.size` selects kindFriendsSpec.
SynthSpec synthFromConfig(const ConfigFile& file, std::uint64_t seed);

}  // namespace rlr
