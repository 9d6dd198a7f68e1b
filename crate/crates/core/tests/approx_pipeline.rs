use mslab_core::approx::{approximate, ApproxOptions};
use mslab_core::spaces;

#[test]
fn linf_schedule_report() {
    let mesh = spaces::gen_linf_square(64).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [0.5, 0.25, 0.125] {
        let t = std::time::Instant::now();
        let r = approximate(&mesh, eps, &ApproxOptions::default()).unwrap();
        eprintln!(
            "eps {eps}: tris {} net {} skel {} chords {} eps_ach {:.4} dist {:.4} dens {:.4} vid {:.2e} area {:.3} lb {:.3} retr {:.4} t {:?}",
            r.n_triangles, r.n_net, r.n_skeleton, r.n_chords, r.epsilon_achieved, r.distortion, r.density_defect,
            r.vertex_identity_error, r.area, r.area_lower_bound, r.retraction_distortion, t.elapsed()
        );
        assert!(r.epsilon_achieved <= prev);
        prev = r.epsilon_achieved;
        assert!(r.vertex_identity_error <= r.vertex_identity_slack);
        assert!(r.area >= r.area_lower_bound && r.area <= r.area_upper_bound);
    }
}
