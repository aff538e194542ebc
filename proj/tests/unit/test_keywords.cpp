#include <stdexcept>
#include "doctest.h"
#include "giml/keywords.hpp"

using namespace giml;

TEST_CASE("polish font colour attribute resolves to FONT_COLOR") {
  const auto& reg = KeywordRegistry::builtin();
  auto id = reg.lookup("kolorCzcionki", Language::pl, KeywordKind::attribute, "REGION_STATE");
  REQUIRE(id);
  CHECK(*id == "FONT_COLOR");
}

TEST_CASE("french transition value resolves to the transition action") {
  const auto& reg = KeywordRegistry::builtin();
  auto id = reg.lookup("transitionVersScene", Language::fr, KeywordKind::enum_value, "ACTION_TYPE");
  REQUIRE(id);
  CHECK(*id == "ACTION_TRANSITION_TO_SCENE");
}

TEST_CASE("render picks the preferred spelling") {
  const auto& reg = KeywordRegistry::builtin();
  CHECK(reg.render("FONT_COLOR", Language::de) == "schriftfarbe");
  CHECK(reg.render("FONT_COLOR", Language::en) == "fontColor");
  CHECK_THROWS_AS(reg.render("NOT_A_KEYWORD", Language::en), std::out_of_range);
}

TEST_CASE("lookup is case-insensitive") {
  const auto& reg = KeywordRegistry::builtin();
  auto id = reg.lookup("FONTCOLOR", Language::en, KeywordKind::attribute, "REGION_STATE");
  REQUIRE(id);
  CHECK(*id == "FONT_COLOR");
}

TEST_CASE("every spelling round trips through lookup for every owner and language") {
  const auto& reg = KeywordRegistry::builtin();
  std::size_t checked = 0;
  for (const auto& e : reg.entries()) {
    for (const auto& owner : e.owners) {
      for (auto lang : kAllLanguages) {
        for (const auto& spelling : e.spellings[static_cast<std::size_t>(lang)]) {
          auto id = reg.lookup(spelling, lang, e.kind, owner);
          INFO(e.canonical_id << " " << spelling << " " << to_string(lang) << " " << owner);
          REQUIRE(id);
          CHECK(*id == e.canonical_id);
          ++checked;
        }
        CHECK(fold_case(reg.render(e.canonical_id, lang)) == fold_case(e.spelling(lang)));
      }
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("enumerated values listed in the tables are present") {
  const auto& reg = KeywordRegistry::builtin();
  for (const char* id : {"ACTION_NONE", "ACTION_BORDER", "ACTION_TRANSITION_TO_SCENE", "ACTION_MOVE",
                         "ACTION_RESET_REGION", "ACTION_RESET_SCENE", "ANIMATION_NONE", "ANIMATION_SIZE_CHANGING",
                         "ANIMATION_ROTATION_CCW", "ANIMATION_ROTATION_CW", "ANIMATION_SWINGING_HORIZONTAL",
                         "ANIMATION_SWINGING_VERTICAL", "COMPLETION_REGION_LEAVE", "COMPLETION_SOUND_ENDING",
                         "COMPLETION_TIME_ELAPSED", "YES", "NO", "SHAPE_RECTANGLE", "SHAPE_CIRCLE", "SHAPE_ELLIPSE"}) {
    INFO(id);
    const auto* e = reg.find(id);
    REQUIRE(e != nullptr);
    CHECK(e->kind == KeywordKind::enum_value);
    for (auto lang : kAllLanguages) CHECK_FALSE(e->spelling(lang).empty());
  }
}

TEST_CASE("registry text parses back to the same table") {
  const auto& reg = KeywordRegistry::builtin();
  auto again = KeywordRegistry::from_text(reg.source_text());
  REQUIRE(again.entries().size() == reg.entries().size());
  for (std::size_t i = 0; i < reg.entries().size(); ++i) {
    CHECK(again.entries()[i].canonical_id == reg.entries()[i].canonical_id);
    CHECK(again.entries()[i].spellings == reg.entries()[i].spellings);
  }
}

TEST_CASE("suggestions name the closest keyword") {
  const auto& reg = KeywordRegistry::builtin();
  auto s = reg.suggest("fontColr", Language::en, KeywordKind::attribute, "REGION_STATE");
  REQUIRE(s);
  CHECK(s->canonical_id == "FONT_COLOR");
  CHECK(edit_distance("kitten", "sitting") == 3);
}
