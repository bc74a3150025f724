// LD_PRELOAD shim: logs every AF_INET/AF_INET6 connect() to $FAULTLOC_NET_LOG
// and refuses any destination that is not loopback.

#include <arpa/inet.h>
#include <dlfcn.h>
#include <netinet/in.h>
#include <sys/socket.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace {

using connect_fn = int (*)(int, const sockaddr*, socklen_t);

bool is_loopback(const sockaddr* addr) {
  if (addr->sa_family == AF_INET) {
    const auto* in = reinterpret_cast<const sockaddr_in*>(addr);
    return (ntohl(in->sin_addr.s_addr) >> 24) == 127;
  }
  const auto* in6 = reinterpret_cast<const sockaddr_in6*>(addr);
  if (IN6_IS_ADDR_LOOPBACK(&in6->sin6_addr)) return true;
  if (IN6_IS_ADDR_V4MAPPED(&in6->sin6_addr)) return in6->sin6_addr.s6_addr[12] == 127;
  return false;
}

void record(const sockaddr* addr, bool allowed) {
  const char* path = std::getenv("FAULTLOC_NET_LOG");
  if (path == nullptr) return;
  char host[INET6_ADDRSTRLEN] = "?";
  if (addr->sa_family == AF_INET) {
    inet_ntop(AF_INET, &reinterpret_cast<const sockaddr_in*>(addr)->sin_addr, host, sizeof host);
  } else {
    inet_ntop(AF_INET6, &reinterpret_cast<const sockaddr_in6*>(addr)->sin6_addr, host, sizeof host);
  }
  if (FILE* f = std::fopen(path, "a")) {
    std::fprintf(f, "%s %s\n", allowed ? "loopback" : "outbound", host);
    std::fclose(f);
  }
}

}  // namespace

extern "C" int connect(int fd, const sockaddr* addr, socklen_t len) {
  static auto real = reinterpret_cast<connect_fn>(dlsym(RTLD_NEXT, "connect"));
  if (addr != nullptr && (addr->sa_family == AF_INET || addr->sa_family == AF_INET6)) {
    const bool allowed = is_loopback(addr);
    record(addr, allowed);
    if (!allowed) {
      errno = EACCES;
      return -1;
    }
  }
  return real(fd, addr, len);
}
