#pragma once

// Lossy codec round trips through an external transcoder process.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/audio/wav.hpp"
#include "editforge/dsp/fft.hpp"
#include "editforge/error.hpp"
#include "editforge/rng.hpp"

namespace editforge {

enum class Codec { mp3, aac };

inline std::string_view codec_extension(Codec codec) { return codec == Codec::mp3 ? "mp3" : "m4a"; }

inline constexpr const char* kTranscoderEnv = "EDITFORGE_TRANSCODER";

/// command_template encodes {input} (WAV) into {output} at {bitrate} kbps;
/// decode_template turns {input} (compressed) back into a 16 kHz mono PCM16
/// WAV at {output}.
struct TranscoderConfig {
  Codec codec = Codec::mp3;
  std::string command_template;
  std::string decode_template;
  std::string binary;  // for diagnostics and availability checks

  static TranscoderConfig ffmpeg(Codec codec, const std::string& binary = "ffmpeg") {
    TranscoderConfig cfg;
    cfg.codec = codec;
    cfg.binary = binary;
    const std::string q = "'" + binary + "'";
    const std::string common = " -hide_banner -loglevel error -nostdin -y";
    const std::string encoder = codec == Codec::mp3 ? "libmp3lame" : "aac";
    cfg.command_template = q + common + " -i {input} -map_metadata -1 -fflags +bitexact -flags:a +bitexact -c:a " +
                           encoder + " -b:a {bitrate}k {output}";
    cfg.decode_template = q + common + " -i {input} -fflags +bitexact -flags:a +bitexact -ac 1 -ar 16000 "
                                       "-c:a pcm_s16le -f wav {output}";
    return cfg;
  }

  /// Uses EDITFORGE_TRANSCODER when set: a bare path names the ffmpeg binary,
  /// anything containing placeholders replaces the encode template.
  static TranscoderConfig from_environment(Codec codec, const std::string& fallback_binary = "ffmpeg") {
    const char* env = std::getenv(kTranscoderEnv);
    if (env == nullptr || *env == '\0') return ffmpeg(codec, fallback_binary);
    const std::string value(env);
    if (value.find('{') == std::string::npos) return ffmpeg(codec, value);
    TranscoderConfig cfg = ffmpeg(codec, fallback_binary);
    cfg.command_template = value;
    cfg.binary = value.substr(0, value.find(' '));
    return cfg;
  }

  void validate() const {
    for (const char* ph : {"{input}", "{output}", "{bitrate}"}) {
      require(command_template.find(ph) != std::string::npos, ErrorKind::configuration,
              std::string("transcoder template lacks ") + ph);
    }
    for (const char* ph : {"{input}", "{output}"}) {
      require(decode_template.find(ph) != std::string::npos, ErrorKind::configuration,
              std::string("decoder template lacks ") + ph);
    }
  }
};

namespace transcode_detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto tag = splitmix64(static_cast<std::uint64_t>(::getpid()) * 1000003ULL + counter.fetch_add(1));
    path_ = std::filesystem::temp_directory_path() / ("editforge-" + std::to_string(::getpid()) + "-" +
                                                      std::to_string(tag % 100000000ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void run(const std::string& command, const std::filesystem::path& stderr_path, const std::string& what) {
  const std::string full = command + " 2> " + shell_quote(stderr_path.string()) + " > /dev/null";
  const int status = std::system(full.c_str());
  if (status != 0) {
    std::string diag = slurp(stderr_path);
    if (diag.size() > 2000) diag.resize(2000);
    int code = status;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    std::string msg = what + " failed (exit " + std::to_string(code) + ")";
    if (code == 127) msg += ": transcoder binary not found";
    fail(ErrorKind::external_process, msg + "; command: " + command + (diag.empty() ? "" : "; stderr: " + diag));
  }
}

/// Lag (in samples) of `decoded` relative to `reference` that maximizes the
/// cross-correlation, searched over [-max_lead, max_delay].
inline std::ptrdiff_t best_lag(std::span<const double> reference, std::span<const double> decoded,
                               std::ptrdiff_t max_lead, std::ptrdiff_t max_delay) {
  const std::size_t n = dsp::next_power_of_two(reference.size() + decoded.size());
  const auto& plan = dsp::plan_for(n);
  std::vector<dsp::Complex> a(n), b(n);
  for (std::size_t i = 0; i < reference.size(); ++i) a[i] = reference[i];
  for (std::size_t i = 0; i < decoded.size(); ++i) b[i] = decoded[i];
  plan.forward(a);
  plan.forward(b);
  for (std::size_t i = 0; i < n; ++i) b[i] *= std::conj(a[i]);
  plan.inverse(b);
  // b[lag] = sum_t decoded[t + lag] * reference[t]
  std::ptrdiff_t best = 0;
  double best_value = -1e300;
  for (std::ptrdiff_t lag = -max_lead; lag <= max_delay; ++lag) {
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : n - static_cast<std::size_t>(-lag);
    const double v = b[idx].real();
    if (v > best_value + 1e-12 * std::abs(best_value)) {
      best_value = v;
      best = lag;
    }
  }
  return best;
}

}  // namespace transcode_detail

/// Availability probe: runs "<binary> -version".
inline bool transcoder_available(const TranscoderConfig& cfg) {
  const std::string cmd = transcode_detail::shell_quote(cfg.binary) + " -version > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

/// encode -> decode -> 16 kHz mono, then aligned to the input by
/// cross-correlation so codec delay/padding is removed; length matches input.
inline AudioBuffer lossy_transcode(const AudioBuffer& buf, int bitrate_kbps, const TranscoderConfig& cfg) {
  cfg.validate();
  using namespace transcode_detail;
  TempDir tmp;
  const auto in_path = tmp.path() / "input.wav";
  const auto coded_path = tmp.path() / ("coded." + std::string(codec_extension(cfg.codec)));
  const auto out_path = tmp.path() / "decoded.wav";
  const auto err_path = tmp.path() / "stderr.txt";
  const AudioBuffer source = resample(buf, kCorpusRate);
  save_wav(source, in_path);

  std::string encode = substitute(cfg.command_template, "{input}", shell_quote(in_path.string()));
  encode = substitute(encode, "{output}", shell_quote(coded_path.string()));
  encode = substitute(encode, "{bitrate}", std::to_string(bitrate_kbps));
  run(encode, err_path, "encode (" + cfg.binary + ")");

  std::string decode = substitute(cfg.decode_template, "{input}", shell_quote(coded_path.string()));
  decode = substitute(decode, "{output}", shell_quote(out_path.string()));
  run(decode, err_path, "decode (" + cfg.binary + ")");

  AudioBuffer decoded = resample(load_wav(out_path), kCorpusRate);
  const auto lag = best_lag(source.samples(), decoded.samples(), 1024, 4096);
  std::vector<double> aligned(source.size(), 0.0);
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + lag;
    if (j >= 0 && j < static_cast<std::ptrdiff_t>(decoded.size())) aligned[i] = decoded[static_cast<std::size_t>(j)];
  }
  return AudioBuffer(std::move(aligned), kCorpusRate);
}

}  // namespace editforge
