// Writes a synthetic multi-speaker speech corpus in the scanner's layout.

#include <iostream>

#include <CLI11.hpp>

#include "editforge/synth/speech.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synth_corpus: formant-synthesized speech corpus"};
  editforge::synth::CorpusOptions opt;
  std::string root;
  app.add_option("root", root, "output directory")->required();
  app.add_option("--languages", opt.languages, "language directory names")->delimiter(',');
  app.add_option("--speakers", opt.speakers_per_language, "speakers per language");
  app.add_option("--utterances", opt.utterances_per_speaker, "utterances per speaker");
  app.add_option("--min-seconds", opt.min_seconds);
  app.add_option("--max-seconds", opt.max_seconds);
  app.add_option("--seed", opt.seed);
  CLI11_PARSE(app, argc, argv);
  opt.root = root;
  try {
    const auto files = editforge::synth::synthesize_corpus(opt);
    std::cout << files.size() << " utterances under " << root << "\n";
  } catch (const editforge::Error& e) {
    std::cerr << "synth_corpus: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
