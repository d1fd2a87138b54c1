macro_rules! example_test {
    ($module:ident, $test:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(count_cnf, count_cnf_runs, "count_cnf.rs");
example_test!(xor_streamlining, xor_streamlining_runs, "xor_streamlining.rs");
example_test!(particle_update, particle_update_runs, "particle_update.rs");
example_test!(sound_bounds, sound_bounds_runs, "sound_bounds.rs");
example_test!(smt_output, smt_output_runs, "smt_output.rs");
example_test!(calibration, calibration_runs, "calibration.rs");
example_test!(survival_audit, survival_audit_runs, "survival_audit.rs");
