//! Minimal JSON text building with floats at 17 significant digits, so
//! identical invocations produce byte-identical output and every value
//! round-trips exactly.

/// 17 significant digits, scientific notation; valid as a JSON number.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".into();
    }
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Field-ordered JSON object builder.
pub struct JsonObject {
    fields: Vec<String>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn push_str(&mut self, key: &str, value: &str) {
        self.fields.push(format!("\"{}\":\"{}\"", escape(key), escape(value)));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.fields.push(format!("\"{}\":{}", escape(key), fmt_f64(value)));
    }

    pub fn push_u64(&mut self, key: &str, value: u64) {
        self.fields.push(format!("\"{}\":{}", escape(key), value));
    }

    pub fn push_u32_array(&mut self, key: &str, values: &[u32]) {
        self.fields.push(format!("\"{}\":{}", escape(key), u32_array(values)));
    }

    pub fn push_f64_array(&mut self, key: &str, values: &[f64]) {
        self.fields.push(format!("\"{}\":{}", escape(key), f64_array(values)));
    }

    pub fn push_str_array(&mut self, key: &str, values: &[String]) {
        let inner: Vec<String> = values.iter().map(|v| format!("\"{}\"", escape(v))).collect();
        self.fields
            .push(format!("\"{}\":[{}]", escape(key), inner.join(",")));
    }

    pub fn push_obj(&mut self, key: &str, obj: JsonObject) {
        self.fields.push(format!("\"{}\":{}", escape(key), obj.finish()));
    }

    pub fn push_obj_array(&mut self, key: &str, objs: Vec<JsonObject>) {
        self.fields.push(format!("\"{}\":{}", escape(key), obj_array(objs)));
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.fields.join(","))
    }
}

pub fn u32_array(values: &[u32]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(","))
}

pub fn f64_array(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
    format!("[{}]", inner.join(","))
}

pub fn obj_array(objs: Vec<JsonObject>) -> String {
    let inner: Vec<String> = objs.into_iter().map(|o| o.finish()).collect();
    format!("[{}]", inner.join(","))
}
