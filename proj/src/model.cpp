#include "sslkit/model.hpp"

#include "sslkit/io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

namespace ssl {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'S', 'S', 'L', 'K', 'C', 'K', 'P', '1'};
}

std::string loss_mode_name(nn::LossMode mode) {
  return mode == nn::LossMode::Custom ? "custom" : "mse_only";
}

nn::LossMode loss_mode_from_name(const std::string& name) {
  if (name == "custom") return nn::LossMode::Custom;
  if (name == "mse_only") return nn::LossMode::MseOnly;
  throw validation_error("unknown loss mode '" + name + "' (expected custom|mse_only)");
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,val_accuracy\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss,
                  r.val_accuracy);
    out << buf;
  }
  if (!out) throw io_error("write failed: " + path);
}

namespace {

json config_to_json(const NetworkConfig& c) {
  return json{{"t", c.t},
              {"s", c.s},
              {"channels", c.channels},
              {"hidden1", c.hidden1},
              {"hidden2", c.hidden2},
              {"loss_mode", loss_mode_name(c.loss_mode)},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"seed", c.seed}};
}

NetworkConfig config_from_json(const json& j) {
  NetworkConfig c;
  c.t = j.at("t").get<int>();
  c.s = j.at("s").get<int>();
  const auto ch = j.at("channels").get<std::vector<int>>();
  if (ch.size() != 4) throw config_mismatch_error("checkpoint channels list must have 4 entries");
  std::copy(ch.begin(), ch.end(), c.channels.begin());
  c.hidden1 = j.at("hidden1").get<int>();
  c.hidden2 = j.at("hidden2").get<int>();
  c.loss_mode = loss_mode_from_name(j.at("loss_mode").get<std::string>());
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.lr = j.at("lr").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void append_floats(std::vector<float>& blob, const std::vector<float>& values) {
  blob.insert(blob.end(), values.begin(), values.end());
}

json tensor_table_entry(const TensorBlob& t, const std::string& role) {
  return json{{"name", t.name}, {"shape", t.shape}, {"count", t.values.size()}, {"role", role}};
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json table = json::array();
  std::vector<float> blob;
  for (const auto& t : ckpt.params) {
    table.push_back(tensor_table_entry(t, "param"));
    append_floats(blob, t.values);
  }
  for (const auto& t : ckpt.buffers) {
    table.push_back(tensor_table_entry(t, "buffer"));
    append_floats(blob, t.values);
  }
  if (ckpt.adam.present) {
    for (std::size_t i = 0; i < ckpt.adam.m.size(); ++i) {
      table.push_back(json{{"name", "adam.m." + std::to_string(i)},
                           {"shape", {static_cast<int>(ckpt.adam.m[i].size())}},
                           {"count", ckpt.adam.m[i].size()},
                           {"role", "adam_m"}});
      append_floats(blob, ckpt.adam.m[i]);
    }
    for (std::size_t i = 0; i < ckpt.adam.v.size(); ++i) {
      table.push_back(json{{"name", "adam.v." + std::to_string(i)},
                           {"shape", {static_cast<int>(ckpt.adam.v[i].size())}},
                           {"count", ckpt.adam.v[i].size()},
                           {"role", "adam_v"}});
      append_floats(blob, ckpt.adam.v[i]);
    }
  }

  json history = json::array();
  for (const auto& r : ckpt.history) {
    history.push_back(json{{"epoch", r.epoch},
                           {"train_loss", r.train_loss},
                           {"val_loss", r.val_loss},
                           {"val_accuracy", r.val_accuracy}});
  }

  json header{{"kind", "sslkit-checkpoint"},
              {"format_version", kFormatVersion},
              {"config", config_to_json(ckpt.config)},
              {"tensors", table},
              {"adam",
               {{"present", ckpt.adam.present},
                {"step_count", ckpt.adam.step_count},
                {"lr", ckpt.adam.lr},
                {"beta1", ckpt.adam.beta1},
                {"beta2", ckpt.adam.beta2},
                {"eps", ckpt.adam.eps}}},
              {"history", history},
              {"blob_count", blob.size()}};

  const std::string header_str = header.dump();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(sizeof(kMagic) + 8 + header_str.size() + blob.size() * 4 + 4);
  bytes.insert(bytes.end(), kMagic, kMagic + sizeof(kMagic));
  const std::uint64_t hlen = header_str.size();
  const auto* hp = reinterpret_cast<const std::uint8_t*>(&hlen);
  bytes.insert(bytes.end(), hp, hp + 8);
  bytes.insert(bytes.end(), header_str.begin(), header_str.end());
  const auto* bp = reinterpret_cast<const std::uint8_t*>(blob.data());
  bytes.insert(bytes.end(), bp, bp + blob.size() * 4);
  const std::uint32_t crc = crc32(bytes.data() + sizeof(kMagic) + 8, bytes.size() - sizeof(kMagic) - 8);
  const auto* cp = reinterpret_cast<const std::uint8_t*>(&crc);
  bytes.insert(bytes.end(), cp, cp + 4);
  write_file_bytes(path, bytes.data(), bytes.size());
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < sizeof(kMagic) + 12 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw io_error("not a checkpoint file: " + path);
  }
  std::uint64_t hlen = 0;
  std::memcpy(&hlen, bytes.data() + sizeof(kMagic), 8);
  const std::size_t payload_off = sizeof(kMagic) + 8;
  if (bytes.size() < payload_off + hlen + 4) throw io_error("truncated checkpoint: " + path);
  const std::size_t crc_off = bytes.size() - 4;
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + crc_off, 4);
  if (crc32(bytes.data() + payload_off, crc_off - payload_off) != stored_crc) {
    throw integrity_error("checkpoint checksum mismatch: " + path);
  }

  json header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(payload_off),
                            bytes.begin() + static_cast<std::ptrdiff_t>(payload_off + hlen));
  if (header.value("kind", "") != "sslkit-checkpoint") {
    throw io_error("not a checkpoint header: " + path);
  }
  if (header.at("format_version").get<int>() != kFormatVersion) {
    throw io_error("unsupported checkpoint format version");
  }

  Checkpoint ckpt;
  ckpt.config = config_from_json(header.at("config"));
  ckpt.adam.present = header.at("adam").at("present").get<bool>();
  ckpt.adam.step_count = header.at("adam").at("step_count").get<long>();
  ckpt.adam.lr = header.at("adam").at("lr").get<double>();
  ckpt.adam.beta1 = header.at("adam").at("beta1").get<double>();
  ckpt.adam.beta2 = header.at("adam").at("beta2").get<double>();
  ckpt.adam.eps = header.at("adam").at("eps").get<double>();
  for (const auto& r : header.at("history")) {
    ckpt.history.push_back({r.at("epoch").get<int>(), r.at("train_loss").get<double>(),
                            r.at("val_loss").get<double>(), r.at("val_accuracy").get<double>()});
  }

  const std::uint64_t blob_count = header.at("blob_count").get<std::uint64_t>();
  const std::size_t blob_off = payload_off + hlen;
  if (crc_off - blob_off != blob_count * 4) throw integrity_error("checkpoint blob size mismatch");
  const float* fp = reinterpret_cast<const float*>(bytes.data() + blob_off);
  std::uint64_t used = 0;
  for (const auto& entry : header.at("tensors")) {
    const std::uint64_t count = entry.at("count").get<std::uint64_t>();
    if (used + count > blob_count) throw integrity_error("checkpoint tensor table overruns blob");
    TensorBlob t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<int>>();
    t.values.assign(fp + used, fp + used + count);
    used += count;
    const std::string role = entry.at("role").get<std::string>();
    if (role == "param") {
      ckpt.params.push_back(std::move(t));
    } else if (role == "buffer") {
      ckpt.buffers.push_back(std::move(t));
    } else if (role == "adam_m") {
      ckpt.adam.m.push_back(std::move(t.values));
    } else if (role == "adam_v") {
      ckpt.adam.v.push_back(std::move(t.values));
    } else {
      throw io_error("unknown tensor role in checkpoint: " + role);
    }
  }
  if (used != blob_count) throw integrity_error("checkpoint blob not fully consumed");
  return ckpt;
}

}  // namespace ssl
