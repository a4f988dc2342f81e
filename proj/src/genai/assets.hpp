#pragma once

namespace emsim::genai::assets {

extern const char* const layout_gen;
extern const char* const dsl_with_examples;
extern const char* const dsl_without_examples;
extern const char* const summary;
extern const char* const stub_fixtures;

}  // namespace emsim::genai::assets
