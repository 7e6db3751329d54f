//! ndarray-linalg is used without a bundled BLAS backend; link the system
//! LAPACK implementation here. Override with QUADEMBED_LAPACK_LIBS, a
//! space-separated list of library names (default: "openblas gfortran").

fn main() {
    println!("cargo:rerun-if-env-changed=QUADEMBED_LAPACK_LIBS");
    let libs = std::env::var("QUADEMBED_LAPACK_LIBS").unwrap_or_else(|_| "openblas gfortran".into());
    for lib in libs.split_whitespace() {
        println!("cargo:rustc-link-lib=dylib={lib}");
    }
}
