#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

LinkKinds classify_link(std::string_view url) {
  std::string u = to_lower_ascii(url);
  std::string_view s = u;
  for (const std::string_view scheme : {"https://", "http://"}) {
    if (s.starts_with(scheme)) {
      s.remove_prefix(scheme.size());
      break;
    }
  }
  const auto host_end = s.find_first_of("/?#");
  std::string_view host = s.substr(0, host_end);
  std::string_view rest = host_end == std::string_view::npos ? std::string_view{} : s.substr(host_end);
  if (const auto at = host.rfind('@'); at != std::string_view::npos) host.remove_prefix(at + 1);
  if (const auto colon = host.find(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  while (!host.empty() && host.back() == '.') host.remove_suffix(1);

  LinkKinds k;
  k.com = host.ends_with(".com") || host == "com";
  k.edu = host.ends_with(".edu") || host.find(".edu.") != std::string_view::npos;
  const auto path_end = rest.find_first_of("?#");
  const auto path = rest.substr(0, path_end);
  k.pdf = path.ends_with(".pdf");
  return k;
}

}  // namespace cmv::features
