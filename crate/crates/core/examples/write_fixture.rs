//! Writes the bundled collision-avoidance document to the path given as the first argument.

fn main() {
    let path = std::env::args()
        .nth(1)
        .expect("usage: write_fixture <path>");
    let session = aic_core::fixture::collision_avoidance();
    aic_core::document::write_atomic(path.as_ref(), &aic_core::save_session(&session))
        .expect("write fixture");
}
