//! The audit manifest is consumed by external tooling; its exact bytes are
//! frozen here.

use vp_dialect::register_ftp_dialects;

const EXPECTED: &str = "\
id\tcost\tschema\tsteps
1\t1000\ts,i\t3
2\t2000\ti,i/s\t4
3\t1000\ts,i,s\t3
4\t2000\ti/i\t4
5\t2000\ti,i,i/i\t4
6\t3000\ts/i,i/i\t5
7\t3000\ts/i/i\t5
8\t1000\ts,i,s,s\t3
9\t2000\ts,i/s,s\t4
10\t2000\ts/i,s,s\t4
11\t4000\ts/i/s,i/s,i\t6
12\t1000\ti\t3
13\t2000\ts,s,s/i\t4
14\t2000\ts/i\t4
15\t5000\ts/i/s/s/i\t7
";

#[test]
fn manifest_bytes_are_stable() {
    assert_eq!(register_ftp_dialects().manifest(), EXPECTED);
}

#[test]
fn manifest_reflects_cost_overrides() {
    let mut registry = register_ftp_dialects();
    let d1 = vp_dialect::DialectId::new(1).unwrap();
    registry.set_cost(d1, 100.0).unwrap();
    let first_line = registry.manifest().lines().nth(1).unwrap().to_owned();
    assert_eq!(first_line, "1\t100\ts,i\t3");
}
