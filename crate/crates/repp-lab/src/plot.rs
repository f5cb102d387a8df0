//! Minimal SVG 1.1 scatter plots, written directly as text.

/// A scatter panel: points in data coordinates on fixed axis limits.
pub struct Scatter<'a> {
    pub title: &'a str,
    pub points: &'a [(f64, f64)],
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_label: &'a str,
    pub y_label: &'a str,
}

const W: f64 = 520.0;
const H: f64 = 420.0;
const ML: f64 = 56.0; // margins
const MR: f64 = 16.0;
const MT: f64 = 34.0;
const MB: f64 = 46.0;

impl Scatter<'_> {
    fn x_pix(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        ML + (x - lo) / (hi - lo) * (W - ML - MR)
    }

    fn y_pix(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        H - MB - (y - lo) / (hi - lo) * (H - MT - MB)
    }

    /// Render the panel as a standalone SVG document.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        s.push_str(&format!(
            "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            W / 2.0,
            xml_escape(self.title)
        ));
        // axes box
        s.push_str(&format!(
            "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
            W - ML - MR,
            H - MT - MB
        ));
        // ticks: 5 per axis
        for i in 0..=5 {
            let fx = self.x_range.0 + (self.x_range.1 - self.x_range.0) * i as f64 / 5.0;
            let px = self.x_pix(fx);
            s.push_str(&format!(
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
                H - MB,
                H - MB + 4.0
            ));
            s.push_str(&format!(
                "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{fx:.2}</text>\n",
                H - MB + 16.0
            ));
            let fy = self.y_range.0 + (self.y_range.1 - self.y_range.0) * i as f64 / 5.0;
            let py = self.y_pix(fy);
            s.push_str(&format!(
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{ML}\" y2=\"{py}\" stroke=\"black\"/>\n",
                ML - 4.0
            ));
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{fy:.2}</text>\n",
                ML - 7.0,
                py + 3.0
            ));
        }
        // axis labels
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            (ML + W - MR) / 2.0,
            H - 10.0,
            xml_escape(self.x_label)
        ));
        s.push_str(&format!(
            "<text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0,
            xml_escape(self.y_label)
        ));
        // points
        for &(x, y) in self.points {
            if x < self.x_range.0 || x > self.x_range.1 || y < self.y_range.0 || y > self.y_range.1
            {
                continue;
            }
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"steelblue\" fill-opacity=\"0.8\"/>\n",
                self.x_pix(x),
                self.y_pix(y)
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_window_still_renders_axes() {
        let p = Scatter {
            title: "empty",
            points: &[],
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            x_label: "t",
            y_label: "mark",
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<rect"));
        assert!(!svg.contains("<circle"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn points_appear_and_output_is_deterministic() {
        let pts = vec![(0.1, 0.5), (0.9, 0.2)];
        let p = Scatter {
            title: "two points",
            points: &pts,
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            x_label: "t",
            y_label: "mark",
        };
        let a = p.to_svg();
        assert_eq!(a.matches("<circle").count(), 2);
        let b = p.to_svg();
        assert_eq!(a, b);
    }
}
