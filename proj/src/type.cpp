#include "qiropt/type.hpp"

#include <memory>
#include <mutex>
#include <unordered_map>

namespace qiropt {

namespace {

// Global intern pool keyed by canonical spelling. Types are immutable and
// leaked for the process lifetime; creation is serialized, lookups after
// interning are plain pointer reads.
struct TypePool {
  std::mutex mu;
  std::unordered_map<std::string, std::unique_ptr<Type>> by_spelling;
};

TypePool &pool() {
  static TypePool *p = new TypePool();
  return *p;
}

}  // namespace

TypeRef Type::intern(Type &&proto) {
  TypePool &p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  auto it = p.by_spelling.find(proto.spelling_);
  if (it != p.by_spelling.end()) return it->second.get();
  auto owned = std::unique_ptr<Type>(new Type(std::move(proto)));
  TypeRef out = owned.get();
  p.by_spelling.emplace(out->spelling_, std::move(owned));
  return out;
}

TypeRef Type::void_ty() {
  Type t;
  t.kind_ = Kind::Void;
  t.spelling_ = "void";
  return intern(std::move(t));
}

TypeRef Type::int_ty(unsigned width) {
  Type t;
  t.kind_ = Kind::Int;
  t.int_width_ = width;
  t.spelling_ = "i" + std::to_string(width);
  return intern(std::move(t));
}

TypeRef Type::opaque_ty(std::string_view name) {
  Type t;
  t.kind_ = Kind::Opaque;
  t.opaque_name_ = std::string(name);
  t.spelling_ = "%" + t.opaque_name_;
  return intern(std::move(t));
}

TypeRef Type::ref_ty(TypeRef pointee) {
  Type t;
  t.kind_ = Kind::Ref;
  t.pointee_ = pointee;
  t.spelling_ = pointee->str() + "*";
  return intern(std::move(t));
}

TypeRef Type::range_ty() {
  Type t;
  t.kind_ = Kind::Range;
  t.spelling_ = "%Range";
  return intern(std::move(t));
}

TypeRef Type::func_sig_ty(TypeRef ret, std::vector<TypeRef> params) {
  Type t;
  t.kind_ = Kind::FuncSig;
  t.return_type_ = ret;
  t.params_ = std::move(params);
  std::string s = ret->str() + " (";
  for (std::size_t i = 0; i < t.params_.size(); ++i) {
    if (i) s += ", ";
    s += t.params_[i]->str();
  }
  s += ")";
  t.spelling_ = std::move(s);
  return intern(std::move(t));
}

TypeRef Type::const_array_ty(TypeRef elem, std::size_t len) {
  Type t;
  t.kind_ = Kind::ConstArray;
  t.pointee_ = elem;
  t.array_len_ = len;
  t.spelling_ = "[" + std::to_string(len) + " x " + elem->str() + "]";
  return intern(std::move(t));
}

TypeRef Type::callable_table() {
  TypeRef wrapper = ref_ty(
      func_sig_ty(void_ty(), {tuple_ptr(), tuple_ptr(), tuple_ptr()}));
  return const_array_ty(wrapper, 4);
}

}  // namespace qiropt
